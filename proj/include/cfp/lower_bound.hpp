#pragma once

#include <string>

#include "cfp/limits.hpp"
#include "cfp/mapping.hpp"

namespace cfp {

enum class BoundRoute { RecessionLimit, SupergradientLimit, ClosedForm };

[[nodiscard]] const char* to_string(BoundRoute r);
BoundRoute bound_route_from_string(const std::string& s);

/// Nonnegative N x N matrix whose (i,k) entry is the infimum over the domain
/// of the k-th supergradient component of the i-th mapping component. Provides
/// the affine minorant T(x) >= T(y) + M (x - y) for x >= y >= 0.
struct LowerBoundingMatrix {
    Matrix entries;      ///< N x N, all entries >= 0
    BoundRoute route = BoundRoute::ClosedForm;
    Matrix entry_error;  ///< estimated per-entry limit error (0 for closed forms)

    [[nodiscard]] Index dim() const { return entries.rows(); }
};

/// Entries below this magnitude are snapped to exactly 0; keeps matrices
/// sparse-friendly and certificates stable across routes.
inline constexpr double kEntryZeroClamp = 1e-12;

/// Builds the lower bounding matrix of T by one of the two numeric limit
/// routes. Per-entry failures are aggregated into a single NonConverged /
/// NonFiniteResult error listing (i,k) positions.
///
/// The supergradient route expands around x0 (default: all-ones vector).
LowerBoundingMatrix build_matrix(const PositiveConcaveMapping& T, BoundRoute route,
                                 const LimitSchedule& sched);
LowerBoundingMatrix build_matrix(const PositiveConcaveMapping& T, BoundRoute route);
LowerBoundingMatrix build_matrix(const PositiveConcaveMapping& T, BoundRoute route,
                                 const LimitSchedule& sched, const Vector& x0);

/// Registers an application-supplied closed-form matrix (bypasses the numeric
/// limits; the numeric routes then serve as validators).
LowerBoundingMatrix closed_form_matrix(Matrix entries);

/// CSV round trip: one header line `n=<N>,route=<route>`, then N rows of N
/// comma-separated entries at 17 significant digits.
void save_matrix_csv(const LowerBoundingMatrix& M, const std::string& path);
LowerBoundingMatrix load_matrix_csv(const std::string& path);

}  // namespace cfp
