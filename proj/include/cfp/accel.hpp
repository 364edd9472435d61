#pragma once

#include <memory>
#include <vector>

#include "cfp/lower_bound.hpp"
#include "cfp/mapping.hpp"
#include "cfp/spectral.hpp"

namespace cfp {

/// The accelerated mapping T_A(x) = (I - M)^{-1} (T(x) - Mx) of a positive
/// concave mapping T with lower bounding matrix M, rho(M) < 1. Shares the
/// fixed point of T and converges no slower component-wise.
///
/// Production evaluation uses the equivalent single-solve form
/// T_A(x) = (I - M)^{-1} (T(x) - x) + x; the defining form is kept for
/// equivalence tests.
class AcceleratedMapping {
public:
    AcceleratedMapping(PositiveConcaveMapping base, LowerBoundingMatrix bound);

    [[nodiscard]] Index dim() const { return state_->base.dim(); }
    [[nodiscard]] const PositiveConcaveMapping& base() const { return state_->base; }
    [[nodiscard]] const LowerBoundingMatrix& bound() const { return state_->bound; }
    [[nodiscard]] const FactoredSystem& system() const { return state_->system; }

    /// Single-solve evaluation.
    Vector operator()(const Vector& x) const;

    /// Defining-form evaluation (two of the same solves algebraically); test
    /// hook for the equivalence of the two expressions.
    Vector evaluate_defining_form(const Vector& x) const;

    /// Wraps this mapping as a PositiveConcaveMapping (it is one), inheriting
    /// the base mapping's divergence cap.
    [[nodiscard]] PositiveConcaveMapping as_mapping() const;

private:
    struct State {
        PositiveConcaveMapping base;
        LowerBoundingMatrix bound;
        FactoredSystem system;
    };
    std::shared_ptr<const State> state_;
};

/// Builds T_A; throws SpectralRadiusTooLarge when rho(M) >= 1 - margin.
AcceleratedMapping build_accelerated(PositiveConcaveMapping T, LowerBoundingMatrix M);

Vector evaluate_accelerated(const AcceleratedMapping& A, const Vector& x);

/// Standard iteration applied to T_A; same stopping and divergence rules as
/// iterate_standard.
IterationTrace iterate_accelerated(const AcceleratedMapping& A, const Vector& x1,
                                   const IterationOptions& opts = {});

enum class DominanceDirection { AcceleratedAbove, AcceleratedBelow, Equal, Mixed };

[[nodiscard]] const char* to_string(DominanceDirection d);

struct DominanceStep {
    double standard_distance = 0.0;     ///< ||x'_n - x*||_inf
    double accelerated_distance = 0.0;  ///< ||x''_n - x*||_inf
    DominanceDirection direction = DominanceDirection::Equal;
};

struct DominanceReport {
    MonotoneDirection regime = MonotoneDirection::None;
    Vector reference;  ///< fixed point from accelerated iteration at tol 1e-12
    std::vector<DominanceStep> steps;
};

/// Runs both iterations from the same (monotone) start and reports per-step
/// component-wise dominance plus sup-norm distances to the reference fixed
/// point. Throws NotMonotoneStart when classify_start(T, x1) is None.
DominanceReport dominance_report(const PositiveConcaveMapping& T,
                                 const AcceleratedMapping& A, const Vector& x1,
                                 int n_steps);

}  // namespace cfp
