#include "cfp/accel.hpp"

#include <cmath>

namespace cfp {

AcceleratedMapping::AcceleratedMapping(PositiveConcaveMapping base,
                                       LowerBoundingMatrix bound)
    : state_([&] {
          if (bound.dim() != base.dim())
              throw Error("lower bounding matrix dimension mismatch");
          auto system = FactoredSystem::factor(NonNegMatrix(bound.entries));
          return std::make_shared<const State>(
              State{std::move(base), std::move(bound), std::move(system)});
      }()) {}

Vector AcceleratedMapping::operator()(const Vector& x) const {
    const Vector tx = state_->base(x);
    return x + state_->system.solve(tx - x);
}

Vector AcceleratedMapping::evaluate_defining_form(const Vector& x) const {
    const Vector tx = state_->base(x);
    return state_->system.solve(tx - state_->bound.entries * x);
}

PositiveConcaveMapping AcceleratedMapping::as_mapping() const {
    auto self = *this;  // shares immutable state
    auto eval = [self](const Vector& x) { return self(x); };
    if (state_->base.divergence_cap())
        return PositiveConcaveMapping(dim(), eval, *state_->base.divergence_cap());
    return PositiveConcaveMapping(dim(), eval);
}

AcceleratedMapping build_accelerated(PositiveConcaveMapping T, LowerBoundingMatrix M) {
    return AcceleratedMapping(std::move(T), std::move(M));
}

Vector evaluate_accelerated(const AcceleratedMapping& A, const Vector& x) {
    return A(x);
}

IterationTrace iterate_accelerated(const AcceleratedMapping& A, const Vector& x1,
                                   const IterationOptions& opts) {
    return iterate_standard(A.as_mapping(), x1, opts);
}

const char* to_string(DominanceDirection d) {
    switch (d) {
        case DominanceDirection::AcceleratedAbove: return "AcceleratedAbove";
        case DominanceDirection::AcceleratedBelow: return "AcceleratedBelow";
        case DominanceDirection::Equal: return "Equal";
        case DominanceDirection::Mixed: return "Mixed";
    }
    return "Unknown";
}

DominanceReport dominance_report(const PositiveConcaveMapping& T,
                                 const AcceleratedMapping& A, const Vector& x1,
                                 int n_steps) {
    if (n_steps < 1) throw Error("dominance_report: n_steps must be >= 1");
    DominanceReport report;
    report.regime = classify_start(T, x1);
    if (report.regime == MonotoneDirection::None)
        throw NotMonotoneStart(
            "T(x1) and x1 are not ordered; dominance needs a monotone start");

    IterationOptions ref_opts;
    ref_opts.tol = 1e-12;
    const IterationTrace ref = iterate_accelerated(A, x1, ref_opts);
    if (ref.status != IterationStatus::Converged)
        throw NonConverged("reference fixed point for dominance report did not converge");
    report.reference = ref.last();

    Vector xs = x1;
    Vector xa = x1;
    report.steps.reserve(static_cast<std::size_t>(n_steps));
    for (int n = 0; n < n_steps; ++n) {
        xs = T(xs);
        xa = A(xa);
        DominanceStep step;
        step.standard_distance = (xs - report.reference).cwiseAbs().maxCoeff();
        step.accelerated_distance = (xa - report.reference).cwiseAbs().maxCoeff();
        const double tiny =
            1e-12 * (1.0 + std::max(xs.cwiseAbs().maxCoeff(), xa.cwiseAbs().maxCoeff()));
        const bool ge = (xa.array() >= xs.array() - tiny).all();
        const bool le = (xa.array() <= xs.array() + tiny).all();
        if (ge && le) step.direction = DominanceDirection::Equal;
        else if (ge) step.direction = DominanceDirection::AcceleratedAbove;
        else if (le) step.direction = DominanceDirection::AcceleratedBelow;
        else step.direction = DominanceDirection::Mixed;
        report.steps.push_back(step);
    }
    return report;
}

}  // namespace cfp
