#include "cfp/spectral.hpp"

#include <cmath>
#include <sstream>

namespace cfp {

NonNegMatrix::NonNegMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
        throw Error("NonNegMatrix must be square");
    if (entries_.rows() < 1) throw Error("NonNegMatrix must be non-empty");
    for (Index i = 0; i < entries_.rows(); ++i)
        for (Index k = 0; k < entries_.cols(); ++k) {
            const double v = entries_(i, k);
            if (!std::isfinite(v)) throw NonFiniteResult("matrix entry is not finite");
            if (v < 0.0) throw Error("matrix entry is negative");
        }
}

double spectral_radius(const NonNegMatrix& M, const SpectralOptions& opts) {
    if (!(opts.tol > 0.0)) throw Error("spectral_radius: tol must be positive");
    const Matrix& A0 = M.entries();
    const Index n = A0.rows();

    const double maxrow = A0.rowwise().sum().maxCoeff();
    if (maxrow == 0.0) return 0.0;

    const double sigma = 1e-3 * maxrow;
    Matrix A = A0;
    A.diagonal().array() += sigma;

    Vector v = Vector::Constant(n, 1.0 / static_cast<double>(n));
    Vector w = A * v;
    double lambda = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iter; ++it) {
        const double nw = w.cwiseAbs().maxCoeff();
        if (nw == 0.0) return 0.0;  // (M + sigma I) annihilates a positive vector
        v = w / nw;
        w = A * v;
        lambda = v.dot(w) / v.dot(v);
        residual = (w - lambda * v).cwiseAbs().maxCoeff();
        if (residual <= opts.tol * std::max(1.0, lambda)) {
            return std::max(lambda - sigma, 0.0);
        }
    }
    std::ostringstream os;
    os << "power iteration stalled after " << opts.max_iter
       << " iterations; Perron-vector residual " << residual << ", estimate "
       << std::max(lambda - sigma, 0.0);
    throw NonConverged(os.str());
}

double spectral_radius(const NonNegMatrix& M, double tol) {
    SpectralOptions opts;
    opts.tol = tol;
    return spectral_radius(M, opts);
}

FactoredSystem::FactoredSystem(Matrix i_minus_m, double rho)
    : i_minus_m_(std::move(i_minus_m)), lu_(i_minus_m_), rho_(rho) {}

FactoredSystem FactoredSystem::factor(const NonNegMatrix& M) {
    const double rho = spectral_radius(M);
    if (rho >= 1.0 - kRhoMargin) {
        std::ostringstream os;
        os << "rho(M) = " << rho << " >= 1 - " << kRhoMargin
           << "; (I - M) is not safely invertible";
        throw SpectralRadiusTooLarge(os.str());
    }
    Matrix a = Matrix::Identity(M.dim(), M.dim()) - M.entries();
    return FactoredSystem(std::move(a), rho);
}

Vector FactoredSystem::solve(const Vector& b) const {
    if (b.size() != dim()) throw Error("FactoredSystem::solve dimension mismatch");
    Vector x = lu_.solve(b);
    // one refinement pass keeps residuals at machine level near rho ~ 1
    Vector r = b - i_minus_m_ * x;
    x += lu_.solve(r);
    return x;
}

Matrix diagonal_similarity(const Matrix& M, const Vector& d) {
    if (d.size() != M.rows()) throw Error("similarity: dimension mismatch");
    if (!(d.minCoeff() > 0.0)) throw Error("similarity: d must be positive");
    Matrix out = M;
    for (Index i = 0; i < M.rows(); ++i)
        for (Index k = 0; k < M.cols(); ++k) out(i, k) = M(i, k) * (d[k] / d[i]);
    return out;
}

bool similar_spectrum_check(const NonNegMatrix& M, const Vector& d) {
    const double r1 = spectral_radius(M);
    const double r2 = spectral_radius(NonNegMatrix(diagonal_similarity(M.entries(), d)));
    return std::abs(r1 - r2) <= 1e-8 * (1.0 + r1);
}

}  // namespace cfp
