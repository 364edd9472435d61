#include "cfp/limits.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cfp {

namespace {

constexpr double kConstantEps = 1e-15;

/// Levin u-transform, diagonal approximant over samples s[0..m].
/// Remainder estimates omega_n = (beta + n)(s_n - s_{n-1}); weights follow the
/// classical explicit formula with the (beta+n+j)/(beta+n+k) normalization.
std::optional<double> levin_diagonal(const std::vector<double>& s, double beta = 1.0) {
    const int m = static_cast<int>(s.size()) - 1;
    const int n = 1;
    const int k = m - n;
    if (k < 1) return std::nullopt;
    double num = 0.0;
    double den = 0.0;
    double binom = 1.0;  // C(k, j), updated incrementally
    for (int j = 0; j <= k; ++j) {
        const double omega = (beta + n + j - 1) * (s[n + j] - s[n + j - 1]);
        if (omega == 0.0) return std::nullopt;
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        const double w =
            sign * binom * std::pow((beta + n + j) / (beta + n + k), k - 1);
        num += w * s[n + j] / omega;
        den += w / omega;
        binom *= static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
    if (den == 0.0 || !std::isfinite(den) || !std::isfinite(num)) return std::nullopt;
    return num / den;
}

/// Wynn rho algorithm; returns the deepest even-column entry.
std::optional<double> rho_last_even(const std::vector<double>& s) {
    const int n = static_cast<int>(s.size());
    if (n < 3) return std::nullopt;
    std::vector<std::vector<double>> table;
    table.push_back(s);
    for (int k = 1; k < n; ++k) {
        const auto& prev = table[k - 1];
        std::vector<double> col(prev.size() - 1);
        for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
            const double d = prev[i + 1] - prev[i];
            if (d == 0.0) return std::nullopt;
            const double base = (k >= 2) ? table[k - 2][i + 1] : 0.0;
            col[i] = base + static_cast<double>(k) / d;
        }
        if (col.empty()) break;
        table.push_back(std::move(col));
    }
    int k = static_cast<int>(table.size()) - 1;
    if (k % 2 != 0) --k;
    if (k < 2) return std::nullopt;
    const double v = table[k].back();
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

std::optional<LimitEstimate> LimitExtrapolator::push(double sample) {
    samples_.push_back(sample);
    const int m = static_cast<int>(samples_.size());
    if (m < 3) return std::nullopt;

    // constant-tail guard: the sequence has already arrived
    const double scale = 1.0 + std::abs(samples_[m - 1]);
    if (std::abs(samples_[m - 1] - samples_[m - 2]) <= kConstantEps * scale &&
        std::abs(samples_[m - 2] - samples_[m - 3]) <= kConstantEps * scale) {
        LimitEstimate est;
        est.value = samples_[m - 1];
        est.error = std::abs(samples_[m - 1] - samples_[m - 2]);
        est.samples = m;
        est.converged = true;
        return est;
    }

    struct Slot {
        std::optional<double>& prev;
        std::optional<double> current;
    };
    Slot slots[2] = {{prev_levin_, levin_diagonal(samples_)},
                     {prev_rho_, rho_last_even(samples_)}};

    for (auto& slot : slots) {
        if (!slot.current) continue;
        const double v = *slot.current;
        if (slot.prev) {
            const double delta = std::abs(v - *slot.prev);
            if (delta < best_delta_) {
                best_delta_ = delta;
                best_value_ = v;
            }
        }
        slot.prev = v;
    }
    return std::nullopt;
}

LimitEstimate LimitExtrapolator::finish() const {
    LimitEstimate est;
    est.samples = static_cast<int>(samples_.size());
    if (std::isfinite(best_delta_)) {
        est.value = best_value_;
        est.error = best_delta_;
        est.converged = best_delta_ <= rel_tol_ * (1.0 + std::abs(best_value_));
    } else if (!samples_.empty()) {
        est.value = samples_.back();
        est.error = std::numeric_limits<double>::infinity();
        est.converged = false;
    }
    return est;
}

namespace {

void check_schedule(const LimitSchedule& sched, bool recession) {
    if (!(sched.h0 > 0.0)) throw Error("limit schedule: h0 must be positive");
    if (!(sched.rel_tol > 0.0)) throw Error("limit schedule: rel_tol must be positive");
    if (sched.max_steps < 3) throw Error("limit schedule: needs at least 3 steps");
    if (recession && !(sched.ratio > 0.0 && sched.ratio < 1.0))
        throw Error("recession schedule requires ratio in (0,1)");
    if (!recession && !(sched.ratio > 1.0))
        throw Error("supergradient schedule requires ratio > 1");
}

[[noreturn]] void throw_nonconverged(const char* route, Index k,
                                     const LimitEstimate& est) {
    std::ostringstream os;
    os << route << " limit in direction " << k << " did not stabilize: best value "
       << est.value << ", width " << est.error << " after " << est.samples
       << " samples";
    throw NonConverged(os.str());
}

}  // namespace

LimitEstimate recession_entry(const ComponentFn& f, Index dim, Index k,
                              const LimitSchedule& sched) {
    check_schedule(sched, true);
    if (k < 0 || k >= dim) throw Error("recession_entry: direction out of range");

    LimitExtrapolator ex(sched.rel_tol);
    double h = sched.h0;
    for (int step = 0; step < sched.max_steps && 1.0 / h <= sched.arg_cap; ++step) {
        Vector x = Vector::Zero(dim);
        x[k] = 1.0 / h;
        const double q = h * f(x);
        if (!std::isfinite(q)) {
            std::ostringstream os;
            os << "recession sample at h = " << h << " is not finite";
            throw NonFiniteResult(os.str());
        }
        if (auto est = ex.push(q)) return *est;
        h *= sched.ratio;
    }
    const LimitEstimate est = ex.finish();
    if (est.converged) return est;
    throw_nonconverged("recession", k, est);
}

namespace {

double central_quotient(const ComponentFn& f, const Vector& x, Index k, double step) {
    Vector xp = x;
    Vector xm = x;
    xp[k] += step;
    xm[k] -= step;
    if (xm[k] < 0.0) xm[k] = 0.0;  // one-sided fallback near the boundary
    const double g = (f(xp) - f(xm)) / (xp[k] - xm[k]);
    return g;
}

}  // namespace

LimitEstimate supergradient_entry(const ComponentFn& f, Index dim, Index k,
                                  const Vector& x0, const LimitSchedule& sched) {
    check_schedule(sched, false);
    if (k < 0 || k >= dim) throw Error("supergradient_entry: direction out of range");
    if (x0.size() != dim) throw Error("supergradient_entry: x0 dimension mismatch");
    if (!(x0.minCoeff() > 0.0)) throw Error("supergradient_entry: x0 must be positive");

    LimitExtrapolator ex(sched.rel_tol);
    double h = sched.h0;
    for (int step = 0; step < sched.max_steps && h <= sched.arg_cap; ++step) {
        Vector x = x0;
        x[k] += h;
        const double delta = sched.diff_step_rel * (1.0 + x.cwiseAbs().maxCoeff());
        const double g = central_quotient(f, x, k, delta);
        if (!std::isfinite(g)) {
            std::ostringstream os;
            os << "difference quotient at h = " << h << " is not finite";
            throw NonFiniteResult(os.str());
        }
        if (auto est = ex.push(g)) return *est;
        h *= sched.ratio;
    }
    const LimitEstimate est = ex.finish();
    if (est.converged) return est;
    throw_nonconverged("supergradient", k, est);
}

std::vector<double> supergradient_samples(const ComponentFn& f, Index dim, Index k,
                                          const Vector& x0, const LimitSchedule& sched) {
    check_schedule(sched, false);
    if (k < 0 || k >= dim) throw Error("supergradient_samples: direction out of range");
    std::vector<double> out;
    double h = sched.h0;
    for (int step = 0; step < sched.max_steps && h <= sched.arg_cap; ++step) {
        Vector x = x0;
        x[k] += h;
        const double delta = sched.diff_step_rel * (1.0 + x.cwiseAbs().maxCoeff());
        out.push_back(central_quotient(f, x, k, delta));
        h *= sched.ratio;
    }
    return out;
}

}  // namespace cfp
