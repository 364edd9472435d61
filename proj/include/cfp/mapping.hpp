#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfp/errors.hpp"

namespace cfp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// A mapping T: R_+^N -> R_++^N whose components are concave and upper
/// semicontinuous. The evaluation function must be a pure function of x;
/// concavity is the caller's responsibility and is spot-checked by tests.
///
/// An optional per-component divergence cap encodes physical limits (load or
/// power budgets); the iteration engine declares divergence as soon as any
/// component exceeds its cap.
class PositiveConcaveMapping {
public:
    using EvalFn = std::function<Vector(const Vector&)>;

    PositiveConcaveMapping(Index dim, EvalFn eval)
        : dim_(dim), eval_(std::move(eval)) {}

    PositiveConcaveMapping(Index dim, EvalFn eval, Vector divergence_cap)
        : dim_(dim), eval_(std::move(eval)), cap_(std::move(divergence_cap)) {}

    [[nodiscard]] Index dim() const { return dim_; }
    [[nodiscard]] const std::optional<Vector>& divergence_cap() const { return cap_; }

    /// Checked evaluation: rejects negative inputs, rejects non-finite or
    /// non-positive outputs.
    Vector operator()(const Vector& x) const;

private:
    Index dim_;
    EvalFn eval_;
    std::optional<Vector> cap_;
};

/// Checked evaluation of T at x (same contract as operator()).
Vector evaluate(const PositiveConcaveMapping& T, const Vector& x);

enum class IterationStatus { Converged, Diverged, MaxIterReached };
enum class MonotoneDirection { Increasing, Decreasing, None };

[[nodiscard]] const char* to_string(IterationStatus s);
[[nodiscard]] const char* to_string(MonotoneDirection d);

struct IterationOptions {
    double tol = 1e-10;     ///< relative sup-norm stopping tolerance
    int max_iter = 100000;
    double default_cap = 1e12;  ///< divergence cap when the mapping has none
};

/// Record of a fixed-point iteration x_{n+1} = T(x_n).
struct IterationTrace {
    std::vector<Vector> iterates;        ///< x_1, x_2, ..., x_last
    std::vector<double> deltas;          ///< ||x_{n+1} - x_n||_inf per step
    std::vector<double> relative_deltas; ///< deltas / (1 + ||x_n||_inf)
    IterationStatus status = IterationStatus::MaxIterReached;
    MonotoneDirection monotone_direction = MonotoneDirection::None;

    [[nodiscard]] const Vector& last() const { return iterates.back(); }
    /// Number of mapping applications performed.
    [[nodiscard]] int steps() const { return static_cast<int>(iterates.size()) - 1; }
};

/// Compares T(x1) with x1 component-wise: Increasing if T(x1) >= x1,
/// Decreasing if T(x1) <= x1, None otherwise.
MonotoneDirection classify_start(const PositiveConcaveMapping& T, const Vector& x1);

/// Standard fixed-point iteration x_{n+1} = T(x_n) from x1.
///
/// Stops when the relative sup-norm step ||x_{n+1} - x_n||_inf / (1 + ||x_n||_inf)
/// drops to opts.tol (Converged), when any component exceeds its divergence
/// cap (Diverged), or after opts.max_iter applications (MaxIterReached).
IterationTrace iterate_standard(const PositiveConcaveMapping& T, const Vector& x1,
                                const IterationOptions& opts = {});

}  // namespace cfp
