#include "cfp/mapping.hpp"

#include <cmath>
#include <sstream>

namespace cfp {

Vector PositiveConcaveMapping::operator()(const Vector& x) const {
    if (x.size() != dim_) {
        throw NegativeInput("mapping input has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(dim_));
    }
    for (Index i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0)) {  // catches negatives and NaN
            std::ostringstream os;
            os << "mapping input component " << i << " = " << x[i] << " is negative";
            throw NegativeInput(os.str());
        }
    }
    Vector y = eval_(x);
    for (Index i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) {
            std::ostringstream os;
            os << "mapping output component " << i << " is not finite";
            throw NonFiniteResult(os.str());
        }
        if (y[i] <= 0.0) {
            std::ostringstream os;
            os << "mapping output component " << i << " = " << y[i]
               << " violates positivity";
            throw NonPositiveValue(os.str());
        }
    }
    return y;
}

Vector evaluate(const PositiveConcaveMapping& T, const Vector& x) { return T(x); }

const char* to_string(IterationStatus s) {
    switch (s) {
        case IterationStatus::Converged: return "Converged";
        case IterationStatus::Diverged: return "Diverged";
        case IterationStatus::MaxIterReached: return "MaxIterReached";
    }
    return "Unknown";
}

const char* to_string(MonotoneDirection d) {
    switch (d) {
        case MonotoneDirection::Increasing: return "Increasing";
        case MonotoneDirection::Decreasing: return "Decreasing";
        case MonotoneDirection::None: return "None";
    }
    return "Unknown";
}

MonotoneDirection classify_start(const PositiveConcaveMapping& T, const Vector& x1) {
    const Vector y = T(x1);
    if ((y.array() >= x1.array()).all()) return MonotoneDirection::Increasing;
    if ((y.array() <= x1.array()).all()) return MonotoneDirection::Decreasing;
    return MonotoneDirection::None;
}

IterationTrace iterate_standard(const PositiveConcaveMapping& T, const Vector& x1,
                                const IterationOptions& opts) {
    if (!(opts.tol > 0.0)) throw Error("iteration tolerance must be positive");
    if (opts.max_iter < 1) throw Error("max_iter must be >= 1");

    const Vector cap = T.divergence_cap()
                           ? *T.divergence_cap()
                           : Vector::Constant(T.dim(), opts.default_cap);

    IterationTrace trace;
    trace.iterates.push_back(x1);
    trace.monotone_direction = classify_start(T, x1);

    for (int n = 0; n < opts.max_iter; ++n) {
        const Vector& x = trace.iterates.back();
        Vector y = T(x);
        const double delta = (y - x).cwiseAbs().maxCoeff();
        const double rel = delta / (1.0 + x.cwiseAbs().maxCoeff());
        trace.iterates.push_back(std::move(y));
        trace.deltas.push_back(delta);
        trace.relative_deltas.push_back(rel);

        if ((trace.iterates.back().array() > cap.array()).any()) {
            trace.status = IterationStatus::Diverged;
            return trace;
        }
        if (rel <= opts.tol) {
            trace.status = IterationStatus::Converged;
            return trace;
        }
    }
    trace.status = IterationStatus::MaxIterReached;
    return trace;
}

}  // namespace cfp
