#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "plap/errors.hpp"
#include "plap/strip.hpp"

namespace plap {

using DenseMat = Eigen::MatrixXd;

struct KernelOptions {
    double tol = 1e-8;       ///< relative to the largest singular value of the scaled operator
    int block = 4;
    int iterations = 12;
    unsigned seed = 20240607u;
};

/// Near-kernel of a sparse square matrix, computed on the diagonally scaled S L S.
struct KernelResult {
    DenseMat basis;                    ///< columns, in the unscaled variables
    std::vector<double> singular_values;  ///< Ritz estimates, relative to sigma_max, ascending
    double sigma_max = 0.0;
    int dimension() const { return int(basis.cols()); }
};

namespace detail {

inline Vec diag_scaling(const SpMat& L) {
    Vec s(L.rows());
    for (int i = 0; i < L.rows(); ++i) {
        const double d = std::abs(L.coeff(i, i));
        s[i] = d > 0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    return s;
}

inline double largest_singular_value(const SpMat& A, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vec x(A.cols());
    for (auto& v : x) v = nd(rng);
    x.normalize();
    double s = 0.0;
    for (int it = 0; it < 60; ++it) {
        Vec y = A.transpose() * (A * x);
        const double n = y.norm();
        if (n == 0.0) return 0.0;
        s = std::sqrt(n);
        x = y / n;
    }
    return s;
}

inline void orthonormalize(DenseMat& X) {
    Eigen::HouseholderQR<DenseMat> qr(X);
    X = qr.householderQ() * DenseMat::Identity(X.rows(), X.cols());
}

}  // namespace detail

/// Right near-kernel (transpose = false) or left near-kernel (transpose = true) of L.
inline KernelResult near_kernel(const SpMat& L, bool transpose, KernelOptions opt = {}) {
    const int n = int(L.rows());
    const Vec s = detail::diag_scaling(L);
    SpMat A = s.asDiagonal() * L * s.asDiagonal();
    if (transpose) A = SpMat(A.transpose());
    A.makeCompressed();

    KernelResult out;
    out.sigma_max = detail::largest_singular_value(A, opt.seed);
    const double shift = 1e-3 * opt.tol * out.sigma_max;
    SpMat B = A;
    for (int i = 0; i < n; ++i) B.coeffRef(i, i) += shift;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(B);
    if (lu.info() != Eigen::Success) throw ConvergenceError("near_kernel: LU factorization failed", {});

    std::mt19937_64 rng(opt.seed + 1);
    std::normal_distribution<double> nd;
    DenseMat X(n, opt.block);
    for (int c = 0; c < opt.block; ++c)
        for (int i = 0; i < n; ++i) X(i, c) = nd(rng);
    detail::orthonormalize(X);
    for (int it = 0; it < opt.iterations; ++it) {
        DenseMat Y = lu.transpose().solve(X);
        X = lu.solve(Y);  // (B^T B)^{-1} X, i.e. B^{-1} B^{-T} X
        detail::orthonormalize(X);
    }
    // Rayleigh-Ritz for singular values of A on span(X)
    const DenseMat AX = A * X;
    Eigen::JacobiSVD<DenseMat> svd(AX, Eigen::ComputeThinV);
    const Vec sv = svd.singularValues();  // descending
    const DenseMat V = X * svd.matrixV();
    std::vector<int> keep;
    for (int c = int(sv.size()) - 1; c >= 0; --c) {
        out.singular_values.push_back(sv[c] / out.sigma_max);
        if (sv[c] < opt.tol * out.sigma_max) keep.push_back(c);
    }
    out.basis.resize(n, int(keep.size()));
    for (std::size_t q = 0; q < keep.size(); ++q) {
        Vec v = s.asDiagonal() * V.col(keep[q]);
        out.basis.col(int(q)) = v / v.norm();
    }
    return out;
}

struct SolveReport {
    Vec x;
    double relative_residual = 0.0;
    std::vector<double> deflated;  ///< multipliers of the left-kernel border, |μ|/‖b‖
    std::vector<double> history;
    int refinements = 0;
};

/// Solves L x = b, optionally bordered by left/right kernel bases:
///   [L  Zl] [x]   [b]
///   [Zr' 0] [μ] = [0]
/// so that x ⊥ Zr and b - Zl μ is compatible; |μ| ‖Zl‖ / ‖b‖ is reported.
inline SolveReport bordered_solve(const SpMat& L, const Vec& b, const DenseMat& Zl, const DenseMat& Zr,
                                  double tol = 1e-10, int max_refine = 20) {
    const int n = int(L.rows()), m = int(Zl.cols());
    if (Zr.cols() != m) throw DomainError("bordered_solve: left and right kernel dimensions differ");
    SpMat Bm(n + m, n + m);
    {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(L.nonZeros() + 2 * std::size_t(n) * m);
        for (int c = 0; c < L.outerSize(); ++c)
            for (SpMat::InnerIterator it(L, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
        for (int q = 0; q < m; ++q)
            for (int i = 0; i < n; ++i) {
                if (Zl(i, q) != 0.0) t.emplace_back(i, n + q, Zl(i, q));
                if (Zr(i, q) != 0.0) t.emplace_back(n + q, i, Zr(i, q));
            }
        Bm.setFromTriplets(t.begin(), t.end());
        Bm.makeCompressed();
    }
    Eigen::SparseLU<SpMat> lu;
    lu.compute(Bm);
    if (lu.info() != Eigen::Success) throw ConvergenceError("bordered_solve: LU factorization failed", {});

    Vec rhs = Vec::Zero(n + m);
    rhs.head(n) = b;
    const double bn = std::max(b.norm(), 1e-300);
    Vec z = Vec::Zero(n + m);
    SolveReport rep;
    Vec r = rhs;
    for (int it = 0; it <= max_refine; ++it) {
        z += lu.solve(r);
        r = rhs - Bm * z;
        const double rel = b.norm() == 0.0 ? r.norm() : r.norm() / bn;
        rep.history.push_back(rel);
        rep.refinements = it;
        if (rel < tol) break;
    }
    rep.relative_residual = rep.history.back();
    if (!(rep.relative_residual < tol)) {
        std::ostringstream os;
        os << "bordered_solve: relative residual " << rep.relative_residual << " after " << max_refine
           << " refinements";
        throw ConvergenceError(os.str(), rep.history);
    }
    rep.x = z.head(n);
    for (int q = 0; q < m; ++q) rep.deflated.push_back(std::abs(z[n + q]) * Zl.col(q).norm() / bn);
    return rep;
}

}  // namespace plap
