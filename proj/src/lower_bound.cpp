#include "cfp/lower_bound.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cfp {

const char* to_string(BoundRoute r) {
    switch (r) {
        case BoundRoute::RecessionLimit: return "RecessionLimit";
        case BoundRoute::SupergradientLimit: return "SupergradientLimit";
        case BoundRoute::ClosedForm: return "ClosedForm";
    }
    return "Unknown";
}

BoundRoute bound_route_from_string(const std::string& s) {
    if (s == "RecessionLimit") return BoundRoute::RecessionLimit;
    if (s == "SupergradientLimit") return BoundRoute::SupergradientLimit;
    if (s == "ClosedForm") return BoundRoute::ClosedForm;
    throw FormatError("unknown bound route: " + s);
}

namespace {

double clamp_entry(double v) {
    if (v < kEntryZeroClamp) return 0.0;  // negatives are estimation noise
    return v;
}

}  // namespace

LowerBoundingMatrix build_matrix(const PositiveConcaveMapping& T, BoundRoute route,
                                 const LimitSchedule& sched, const Vector& x0) {
    if (route == BoundRoute::ClosedForm)
        throw Error("build_matrix computes numeric routes; use closed_form_matrix");
    const Index n = T.dim();

    LowerBoundingMatrix out;
    out.route = route;
    out.entries = Matrix::Zero(n, n);
    out.entry_error = Matrix::Zero(n, n);

    std::ostringstream failures;
    int n_failures = 0;
    for (Index i = 0; i < n; ++i) {
        ComponentFn fi = [&T, i](const Vector& x) { return T(x)[i]; };
        for (Index k = 0; k < n; ++k) {
            try {
                LimitEstimate est = (route == BoundRoute::RecessionLimit)
                                        ? recession_entry(fi, n, k, sched)
                                        : supergradient_entry(fi, n, k, x0, sched);
                out.entries(i, k) = clamp_entry(est.value);
                out.entry_error(i, k) = est.error;
            } catch (const Error& e) {
                if (n_failures++) failures << "; ";
                failures << "(" << i << "," << k << "): " << e.what();
            }
        }
    }
    if (n_failures > 0) {
        throw NonConverged("build_matrix failed for " + std::to_string(n_failures) +
                           " entries: " + failures.str());
    }
    return out;
}

LowerBoundingMatrix build_matrix(const PositiveConcaveMapping& T, BoundRoute route,
                                 const LimitSchedule& sched) {
    return build_matrix(T, route, sched, Vector::Ones(T.dim()));
}

LowerBoundingMatrix build_matrix(const PositiveConcaveMapping& T, BoundRoute route) {
    const LimitSchedule sched = (route == BoundRoute::RecessionLimit)
                                    ? LimitSchedule::recession()
                                    : LimitSchedule::supergradient();
    return build_matrix(T, route, sched);
}

LowerBoundingMatrix closed_form_matrix(Matrix entries) {
    if (entries.rows() != entries.cols()) throw Error("closed-form matrix must be square");
    for (Index i = 0; i < entries.rows(); ++i)
        for (Index k = 0; k < entries.cols(); ++k) {
            if (!std::isfinite(entries(i, k)))
                throw NonFiniteResult("closed-form matrix entry is not finite");
            if (entries(i, k) < 0.0)
                throw Error("closed-form matrix entry is negative");
        }
    LowerBoundingMatrix out;
    out.route = BoundRoute::ClosedForm;
    out.entry_error = Matrix::Zero(entries.rows(), entries.cols());
    out.entries = std::move(entries);
    return out;
}

void save_matrix_csv(const LowerBoundingMatrix& M, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "n=" << M.dim() << ",route=" << to_string(M.route) << "\n";
    char buf[40];
    for (Index i = 0; i < M.dim(); ++i) {
        for (Index k = 0; k < M.dim(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", M.entries(i, k));
            f << buf << (k + 1 < M.dim() ? "," : "\n");
        }
    }
    if (!f) throw IoError("write failed: " + path);
}

LowerBoundingMatrix load_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string header;
    if (!std::getline(f, header)) throw FormatError("empty matrix file: " + path);

    Index n = -1;
    std::string route_str;
    try {
        std::istringstream hs(header);
        std::string field;
        while (std::getline(hs, field, ',')) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) throw FormatError("bad matrix header: " + header);
            const std::string key = field.substr(0, eq);
            const std::string val = field.substr(eq + 1);
            if (key == "n") n = std::stoll(val);
            else if (key == "route") route_str = val;
            else throw FormatError("unknown matrix header key: " + key);
        }
    } catch (const std::logic_error&) {
        throw FormatError("bad matrix header: " + header);
    }
    if (n < 1 || route_str.empty()) throw FormatError("incomplete matrix header: " + header);

    LowerBoundingMatrix out;
    out.route = bound_route_from_string(route_str);
    out.entries = Matrix::Zero(n, n);
    out.entry_error = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        std::string line;
        if (!std::getline(f, line)) throw FormatError("matrix file truncated: " + path);
        std::istringstream ls(line);
        std::string cell;
        for (Index k = 0; k < n; ++k) {
            if (!std::getline(ls, cell, ','))
                throw FormatError("matrix row " + std::to_string(i) + " too short");
            try {
                out.entries(i, k) = std::stod(cell);
            } catch (const std::logic_error&) {
                throw FormatError("bad matrix entry: " + cell);
            }
            if (!(out.entries(i, k) >= 0.0))
                throw FormatError("matrix entry must be nonnegative");
        }
    }
    return out;
}

}  // namespace cfp
