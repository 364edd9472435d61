#pragma once

#include <Eigen/Dense>

#include "cfp/mapping.hpp"

namespace cfp {

/// Validated nonnegative square matrix.
class NonNegMatrix {
public:
    explicit NonNegMatrix(Matrix entries);

    [[nodiscard]] const Matrix& entries() const { return entries_; }
    [[nodiscard]] Index dim() const { return entries_.rows(); }

private:
    Matrix entries_;
};

struct SpectralOptions {
    double tol = 1e-10;
    int max_iter = 200000;
};

/// Spectral radius of a nonnegative matrix via power iteration with a small
/// diagonal shift sigma = 1e-3 * max row sum; the shift makes imprimitive
/// (periodic) patterns like [[0,1],[1,0]] converge and is subtracted from the
/// result. Throws NonConverged (with the Perron-vector residual) on stall.
double spectral_radius(const NonNegMatrix& M, double tol);
double spectral_radius(const NonNegMatrix& M, const SpectralOptions& opts = {});

/// Reusable factorization of (I - M) for a nonnegative M with rho(M) < 1.
/// Solves carry one step of iterative refinement; with nonnegative right-hand
/// sides the solutions are nonnegative.
class FactoredSystem {
public:
    /// Throws SpectralRadiusTooLarge when rho(M) >= 1 - 1e-12 (the strict
    /// margin avoids certifying borderline systems).
    static FactoredSystem factor(const NonNegMatrix& M);

    [[nodiscard]] Vector solve(const Vector& b) const;
    [[nodiscard]] double rho() const { return rho_; }
    [[nodiscard]] Index dim() const { return i_minus_m_.rows(); }

private:
    FactoredSystem(Matrix i_minus_m, double rho);

    Matrix i_minus_m_;
    Eigen::PartialPivLU<Matrix> lu_;
    double rho_;
};

/// Margin below 1 required of rho(M) before (I - M) is factored.
inline constexpr double kRhoMargin = 1e-12;

/// True iff rho(M) equals rho(diag(d)^{-1} M diag(d)) within 1e-8 * (1 + rho).
bool similar_spectrum_check(const NonNegMatrix& M, const Vector& d);

/// diag(d)^{-1} M diag(d) for positive d.
Matrix diagonal_similarity(const Matrix& M, const Vector& d);

}  // namespace cfp
