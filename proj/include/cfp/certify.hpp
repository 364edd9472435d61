#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cfp/lower_bound.hpp"
#include "cfp/mapping.hpp"
#include "cfp/spectral.hpp"

namespace cfp {

enum class Verdict { Infeasible, FeasibleProven, Unknown };

enum class CertReason {
    NecessaryViolated,     ///< rho(M) >= 1, so no fixed point exists
    SufficientAffineBound, ///< T(x) <= y + Mx verified on samples, rho < 1
    ModelSpecificIff,      ///< application-level iff theorem (load model)
    RhoBelowOneOnly        ///< rho < 1 is all the evidence available
};

[[nodiscard]] const char* to_string(Verdict v);
[[nodiscard]] const char* to_string(CertReason r);

/// Fixed-point-existence certificate derived from the lower bounding matrix.
struct Certificate {
    Verdict verdict = Verdict::Unknown;
    double rho = 0.0;
    CertReason reason = CertReason::RhoBelowOneOnly;
    /// Fixed point of the affine minorant T_L(x) = T(0) + Mx, i.e.
    /// (I - M)^{-1} T(0); present only when rho < 1 with margin. Lower-bounds
    /// any fixed point of T component-wise.
    std::optional<Vector> lower_bound_fixed_point;
    /// Sample x violating T(x) <= y + Mx (sufficient-condition check only).
    std::optional<Vector> witness;
    /// FeasibleProven came from sampled verification, not a proof.
    bool sampled_verification = false;
    /// capacity_prune found the lower bound exceeding the capacity vector.
    bool capacity_exceeded = false;
};

/// Necessary condition (spectral radius of the lower bounding matrix):
/// Infeasible when rho(M) >= 1; otherwise Unknown with the affine lower-bound
/// fixed point attached (when rho is below 1 with margin).
Certificate certify_necessary(const PositiveConcaveMapping& T,
                              const LowerBoundingMatrix& M);

/// Sufficient condition under an affine upper bound: checks T(x) <= y + Mx on
/// n_samples random points (half uniform in [0,10]^N, half log-uniform
/// magnitudes up to 1e6) and returns FeasibleProven if all pass and rho < 1.
/// Any violation returns Unknown with the witness attached.
///
/// With model_specific_iff set, the caller asserts an application-level
/// theorem that rho < 1 alone implies existence (the OFDMA load model);
/// sampling is skipped and the reason is ModelSpecificIff.
Certificate certify_sufficient_affine(const PositiveConcaveMapping& T,
                                      const LowerBoundingMatrix& M, const Vector& y,
                                      int n_samples, std::uint64_t seed = 0,
                                      bool model_specific_iff = false);

/// Downgrades a certificate to Infeasible when its affine lower-bound fixed
/// point already exceeds the capacity vector component-wise.
Certificate capacity_prune(const Certificate& cert, const Vector& capacity);

/// Key-value text form (one `key=value` per line).
std::string to_text(const Certificate& cert);

}  // namespace cfp
