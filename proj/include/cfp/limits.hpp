#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "cfp/mapping.hpp"

namespace cfp {

/// Geometric schedule of h values driving a one-sided limit.
///
/// Recession route: h0 = 1 shrinking by `ratio` in (0,1), arguments h^{-1} e_k
/// capped at arg_cap. Supergradient route: h growing by `ratio` > 1 up to
/// arg_cap.
struct LimitSchedule {
    double h0 = 1.0;
    double ratio = 0.25;
    // The arg_cap bounds the schedule at ~20 samples, which puts the
    // extrapolation floor of logarithmically converging entries (power-mapping
    // diagonals) near 1e-8; 1e-7 stabilizes reliably and stays two orders
    // inside the route-agreement tolerance.
    double rel_tol = 1e-7;
    int max_steps = 60;
    double arg_cap = 1e12;
    // Central-difference step relative to 1 + ||x||_inf. Large steps tame the
    // cancellation noise of the quotient (~eps/step); the truncation term is
    // smooth in h and extrapolates away with the signal.
    double diff_step_rel = 1e-2;

    static LimitSchedule recession() { return LimitSchedule{}; }

    // The difference-quotient route needs a denser, deeper schedule than the
    // recession route: quotients carry ~1e-12 relative noise, and the
    // logarithmically converging entries only stabilize below tolerance with
    // ~50 samples reaching h = 1e15.
    static LimitSchedule supergradient() {
        LimitSchedule s;
        s.ratio = 2.0;
        s.rel_tol = 5e-7;
        s.arg_cap = 1e15;
        return s;
    }
};

/// Result of a numeric limit computation.
struct LimitEstimate {
    double value = 0.0;
    double error = 0.0;   ///< width of the last stabilization step
    int samples = 0;
    bool converged = false;
};

/// Accelerates a slowly converging sample sequence toward its limit.
///
/// Two transforms run side by side: a Levin u-transform (geometric and
/// power-law tails: affine, sqrt-like, analytic-in-h entries) and Wynn's rho
/// algorithm (rational-in-n tails: the logarithmically converging entries of
/// power mappings). Each transform yields one refined estimate per extra
/// sample; the final value is the estimate at the point of maximal stability
/// (smallest successive change across both transforms), which resists the
/// noise wobble of difference-quotient inputs. Exactly constant sequences
/// short-circuit to their value.
class LimitExtrapolator {
public:
    explicit LimitExtrapolator(double rel_tol) : rel_tol_(rel_tol) {}

    /// Feed the next raw sample; returns an estimate early only for exactly
    /// constant tails.
    std::optional<LimitEstimate> push(double sample);

    /// The maximal-stability estimate over everything seen; converged iff its
    /// width meets rel_tol (relative to 1 + |value|).
    [[nodiscard]] LimitEstimate finish() const;

    [[nodiscard]] const std::vector<double>& samples() const { return samples_; }

private:
    double rel_tol_;
    std::vector<double> samples_;
    std::optional<double> prev_levin_, prev_rho_;
    double best_value_ = 0.0;
    double best_delta_ = std::numeric_limits<double>::infinity();
};

using ComponentFn = std::function<double(const Vector&)>;

/// Recession value of f in direction e_k: the limit of q(h) = h f(h^{-1} e_k)
/// as h -> 0+ along the schedule. For concave positive f the raw samples are
/// non-increasing; the extrapolated limit equals the infimum of the k-th
/// supergradient component over the domain.
LimitEstimate recession_entry(const ComponentFn& f, Index dim, Index k,
                              const LimitSchedule& sched = LimitSchedule::recession());

/// Supergradient-limit value: the k-th supergradient component of f at
/// x0 + h e_k, approximated by a central difference quotient, for h growing
/// along the schedule. Equals the recession value for concave positive f.
LimitEstimate supergradient_entry(const ComponentFn& f, Index dim, Index k,
                                  const Vector& x0,
                                  const LimitSchedule& sched = LimitSchedule::supergradient());

/// Raw difference-quotient samples of the supergradient route (exposed for
/// monotonicity property checks).
std::vector<double> supergradient_samples(const ComponentFn& f, Index dim, Index k,
                                          const Vector& x0, const LimitSchedule& sched);

}  // namespace cfp
