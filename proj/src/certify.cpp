#include "cfp/certify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cfp/rng.hpp"

namespace cfp {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Infeasible: return "Infeasible";
        case Verdict::FeasibleProven: return "FeasibleProven";
        case Verdict::Unknown: return "Unknown";
    }
    return "Unknown";
}

const char* to_string(CertReason r) {
    switch (r) {
        case CertReason::NecessaryViolated: return "NecessaryViolated";
        case CertReason::SufficientAffineBound: return "SufficientAffineBound";
        case CertReason::ModelSpecificIff: return "ModelSpecificIff";
        case CertReason::RhoBelowOneOnly: return "RhoBelowOneOnly";
    }
    return "Unknown";
}

namespace {

void check_dims(const PositiveConcaveMapping& T, const LowerBoundingMatrix& M) {
    if (M.dim() != T.dim())
        throw Error("lower bounding matrix dimension does not match the mapping");
}

}  // namespace

Certificate certify_necessary(const PositiveConcaveMapping& T,
                              const LowerBoundingMatrix& M) {
    check_dims(T, M);
    Certificate cert;
    cert.rho = spectral_radius(NonNegMatrix(M.entries));
    if (cert.rho >= 1.0) {
        cert.verdict = Verdict::Infeasible;
        cert.reason = CertReason::NecessaryViolated;
        return cert;
    }
    cert.verdict = Verdict::Unknown;
    cert.reason = CertReason::RhoBelowOneOnly;
    if (cert.rho < 1.0 - kRhoMargin) {
        const auto sys = FactoredSystem::factor(NonNegMatrix(M.entries));
        cert.lower_bound_fixed_point = sys.solve(T(Vector::Zero(T.dim())));
    }
    return cert;
}

Certificate certify_sufficient_affine(const PositiveConcaveMapping& T,
                                      const LowerBoundingMatrix& M, const Vector& y,
                                      int n_samples, std::uint64_t seed,
                                      bool model_specific_iff) {
    check_dims(T, M);
    if (y.size() != T.dim()) throw Error("y dimension mismatch");
    if (n_samples < 1) throw Error("n_samples must be >= 1");

    Certificate cert;
    cert.rho = spectral_radius(NonNegMatrix(M.entries));
    if (cert.rho >= 1.0 - kRhoMargin) {
        std::ostringstream os;
        os << "sufficient condition requires rho(M) < 1, got " << cert.rho;
        throw SpectralRadiusTooLarge(os.str());
    }
    const auto sys = FactoredSystem::factor(NonNegMatrix(M.entries));
    cert.lower_bound_fixed_point = sys.solve(T(Vector::Zero(T.dim())));

    if (model_specific_iff) {
        cert.verdict = Verdict::FeasibleProven;
        cert.reason = CertReason::ModelSpecificIff;
        return cert;
    }

    const Index n = T.dim();
    SplitStream rng(seed, 0x5afeu);
    // floating-point slack: T(x) and y + Mx are evaluated along different
    // arithmetic paths, so exact equality cases need a few ulps of room
    constexpr double kSlack = 1e-9;
    for (int s = 0; s < n_samples; ++s) {
        Vector x(n);
        if (s % 2 == 0) {
            for (Index i = 0; i < n; ++i) x[i] = rng.uniform(0.0, 10.0);
        } else {
            const double mag = std::pow(10.0, rng.uniform(0.0, 6.0));
            for (Index i = 0; i < n; ++i) x[i] = mag * rng.uniform();
        }
        const Vector lhs = T(x);
        const Vector rhs = y + M.entries * x;
        for (Index i = 0; i < n; ++i) {
            if (lhs[i] > rhs[i] + kSlack * (1.0 + std::abs(rhs[i]))) {
                cert.verdict = Verdict::Unknown;
                cert.reason = CertReason::RhoBelowOneOnly;
                cert.witness = x;
                return cert;
            }
        }
    }
    cert.verdict = Verdict::FeasibleProven;
    cert.reason = CertReason::SufficientAffineBound;
    cert.sampled_verification = true;
    return cert;
}

Certificate capacity_prune(const Certificate& cert, const Vector& capacity) {
    if (!cert.lower_bound_fixed_point)
        throw MissingLowerBound("certificate carries no lower-bound fixed point");
    const Vector& lb = *cert.lower_bound_fixed_point;
    if (lb.size() != capacity.size())
        throw Error("capacity vector dimension mismatch");
    Certificate out = cert;
    if ((lb.array() > capacity.array()).any()) {
        out.verdict = Verdict::Infeasible;
        out.capacity_exceeded = true;
    }
    return out;
}

std::string to_text(const Certificate& cert) {
    std::ostringstream os;
    char buf[40];
    os << "verdict=" << to_string(cert.verdict) << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", cert.rho);
    os << "rho=" << buf << "\n";
    os << "reason=" << to_string(cert.reason) << "\n";
    os << "sampled_verification=" << (cert.sampled_verification ? "true" : "false")
       << "\n";
    os << "capacity_exceeded=" << (cert.capacity_exceeded ? "true" : "false") << "\n";
    if (cert.lower_bound_fixed_point) {
        os << "lower_bound_fixed_point=";
        for (Index i = 0; i < cert.lower_bound_fixed_point->size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", (*cert.lower_bound_fixed_point)[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
    if (cert.witness) {
        os << "witness=";
        for (Index i = 0; i < cert.witness->size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", (*cert.witness)[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace cfp
