#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>

#include "plap/coefficients.hpp"

namespace plap {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Uniform grid on one period of the strip: θ periodic, y = -ln r in [0, y_max].
/// Node (i, j) sits at (i hθ, j hy) with index j n_theta + i.
struct StripGrid {
    int n_theta = 128;
    int n_y = 256;
    double y_max = 7.0;
    double period = 2.0 * std::numbers::pi / 3.0;

    double h_theta() const { return period / n_theta; }
    double h_y() const { return y_max / (n_y - 1); }
    int size() const { return n_theta * n_y; }
    int index(int i, int j) const { return j * n_theta + ((i % n_theta) + n_theta) % n_theta; }
    double theta(int i) const { return i * h_theta(); }
    double y(int j) const { return j * h_y(); }
    double r(int j) const { return std::exp(-y(j)); }
    bool on_outer(int idx) const { return idx < n_theta; }
    bool on_inner(int idx) const { return idx >= (n_y - 1) * n_theta; }
};

inline StripGrid make_strip_grid(const ProblemParams& pp, int n_theta, int n_y, std::optional<double> y_max = {}) {
    StripGrid g{n_theta, n_y, y_max.value_or(pp.default_y_max()), pp.period()};
    if (n_theta < 32 || n_y < 32) throw DomainError("StripGrid: n_theta and n_y must be at least 32");
    if (!(std::exp(-2.0 * pp.alpha_strip * g.y_max) < 1e-12)) {
        std::ostringstream os;
        os << "StripGrid: y_max = " << g.y_max << " leaves exp(-2 alpha_strip y_max) >= 1e-12";
        throw DomainError(os.str());
    }
    return g;
}

/// Coefficient of the ∇u form in (θ, y) ordering, without the factor e^{-2α y}.
template <class T>
Sym2<T> strip_matrix(const Sym2<T>& m) {
    return {m.tt, -m.rt, m.rr};  // (θθ, θy, yy)
}

/// Two-point Gauss rule on [0, 1].
inline constexpr std::array<double, 2> kGauss2 = {0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};
/// Three-point Gauss rule on [0, 1].
inline constexpr std::array<double, 3> kGauss3 = {0.5 - 0.5 * 0.7745966692414834, 0.5, 0.5 + 0.5 * 0.7745966692414834};
inline constexpr std::array<double, 3> kGauss3W = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

namespace q1 {

// local order: (0,0) (1,0) (0,1) (1,1) in (ξ along θ, η along y)
inline std::array<double, 4> shape(double xi, double eta) {
    return {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
}
inline std::array<double, 4> dxi(double eta) { return {-(1 - eta), 1 - eta, -eta, eta}; }
inline std::array<double, 4> deta(double xi) { return {-(1 - xi), -xi, 1 - xi, xi}; }

inline std::array<int, 4> nodes(const StripGrid& g, int i, int j) {
    return {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)};
}

}  // namespace q1

/// ωÃ rotated to the strip ordering at the two Gauss abscissae of every θ-cell.
struct AngularTable {
    std::vector<Sym2<double>> k;  // index 2 i + g
    std::vector<double> theta;
};

inline AngularTable tabulate_gauss(const StripGrid& g, const CoefficientField& field) {
    AngularTable t;
    for (int i = 0; i < g.n_theta; ++i)
        for (double xi : kGauss2) {
            const double th = (i + xi) * g.h_theta();
            t.theta.push_back(th);
            t.k.push_back(strip_matrix(field.angular(th)));
        }
    return t;
}

struct AssemblyOptions {
    bool skew = true;  ///< include the C part of B
};

/// Matrix of the Dirichlet form: L(i, j) = D(φ_i, φ_j), Q1 elements with 2x2 Gauss quadrature.
/// The skew part is ∫ J(Π(c v), u) with J(f, g) = f_y g_θ - f_θ g_y, which is exact on Q1.
inline SpMat assemble_dirichlet(const StripGrid& g, const CoefficientField& field, AssemblyOptions opts = {}) {
    const double ht = g.h_theta(), hy = g.h_y(), alpha = field.params().alpha_space;
    const auto tab = tabulate_gauss(g, field);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(g.n_theta) * (g.n_y - 1) * 16 * 2);

    // local skew matrix, identical on every cell
    std::array<std::array<double, 4>, 4> jm{};
    for (double xi : kGauss2)
        for (double eta : kGauss2) {
            const auto dx = q1::dxi(eta), de = q1::deta(xi);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    jm[a][b] += 0.25 * ((de[a] / hy) * (dx[b] / ht) - (dx[a] / ht) * (de[b] / hy)) * ht * hy;
        }
    std::vector<double> c_node;
    if (opts.skew) {
        c_node.resize(g.size());
        for (int j = 0; j < g.n_y; ++j)
            for (int i = 0; i < g.n_theta; ++i) c_node[g.index(i, j)] = skew_c(field, g.r(j), g.theta(i));
    }

    for (int j = 0; j + 1 < g.n_y; ++j) {
        std::array<double, 2> wy;
        for (int q = 0; q < 2; ++q) wy[q] = std::exp(-2.0 * alpha * (g.y(j) + kGauss2[q] * hy));
        for (int i = 0; i < g.n_theta; ++i) {
            const auto nd = q1::nodes(g, i, j);
            double e[4][4] = {};
            for (int gx = 0; gx < 2; ++gx) {
                const auto& K = tab.k[2 * i + gx];
                for (int gy = 0; gy < 2; ++gy) {
                    const double w = 0.25 * ht * hy * wy[gy];
                    const auto dx = q1::dxi(kGauss2[gy]), de = q1::deta(kGauss2[gx]);
                    for (int a = 0; a < 4; ++a) {
                        const double at = dx[a] / ht, ay = de[a] / hy;
                        for (int b = 0; b < 4; ++b) {
                            const double bt = dx[b] / ht, by = de[b] / hy;
                            e[a][b] += w * (at * (K.rr * bt + K.rt * by) + ay * (K.rt * bt + K.tt * by));
                        }
                    }
                }
            }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    double v = e[a][b];
                    if (opts.skew) v += c_node[nd[a]] * jm[a][b];
                    if (v != 0.0) trip.emplace_back(nd[a], nd[b], v);
                }
        }
    }
    SpMat L(g.size(), g.size());
    L.setFromTriplets(trip.begin(), trip.end());
    L.makeCompressed();
    return L;
}

/// ∫ u φ e^{-γ y} dθ dy (consistent Q1 mass).
inline SpMat gram_mass(const StripGrid& g, double gamma) {
    const double ht = g.h_theta(), hy = g.h_y();
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j + 1 < g.n_y; ++j)
        for (int i = 0; i < g.n_theta; ++i) {
            const auto nd = q1::nodes(g, i, j);
            for (int gx = 0; gx < 3; ++gx)
                for (int gy = 0; gy < 3; ++gy) {
                    const double w = kGauss3W[gx] * kGauss3W[gy] * ht * hy * std::exp(-gamma * (g.y(j) + kGauss3[gy] * hy));
                    const auto s = q1::shape(kGauss3[gx], kGauss3[gy]);
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) trip.emplace_back(nd[a], nd[b], w * s[a] * s[b]);
                }
        }
    SpMat M(g.size(), g.size());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

/// ∫ ∇u·∇φ e^{-γ y} dθ dy.
inline SpMat gram_gradient(const StripGrid& g, double gamma) {
    const double ht = g.h_theta(), hy = g.h_y();
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j + 1 < g.n_y; ++j)
        for (int i = 0; i < g.n_theta; ++i) {
            const auto nd = q1::nodes(g, i, j);
            for (int gx = 0; gx < 3; ++gx)
                for (int gy = 0; gy < 3; ++gy) {
                    const double w = kGauss3W[gx] * kGauss3W[gy] * ht * hy * std::exp(-gamma * (g.y(j) + kGauss3[gy] * hy));
                    const auto dx = q1::dxi(kGauss3[gy]), de = q1::deta(kGauss3[gx]);
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b)
                            trip.emplace_back(nd[a], nd[b], w * (dx[a] * dx[b] / (ht * ht) + de[a] * de[b] / (hy * hy)));
                }
        }
    SpMat M(g.size(), g.size());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

using StripFunction = std::function<double(double theta, double y)>;

/// b_i = ∫ f φ_i dθ dy with 3x3 Gauss per cell.
inline Vec domain_load(const StripGrid& g, const StripFunction& f) {
    const double ht = g.h_theta(), hy = g.h_y();
    Vec b = Vec::Zero(g.size());
    for (int j = 0; j + 1 < g.n_y; ++j)
        for (int i = 0; i < g.n_theta; ++i) {
            const auto nd = q1::nodes(g, i, j);
            for (int gx = 0; gx < 3; ++gx)
                for (int gy = 0; gy < 3; ++gy) {
                    const double th = g.theta(i) + kGauss3[gx] * ht, y = g.y(j) + kGauss3[gy] * hy;
                    const double w = kGauss3W[gx] * kGauss3W[gy] * ht * hy * f(th, y);
                    const auto s = q1::shape(kGauss3[gx], kGauss3[gy]);
                    for (int a = 0; a < 4; ++a) b[nd[a]] += w * s[a];
                }
        }
    return b;
}

/// b_i = ∫ h(θ) φ_i dθ along the row j (3-point Gauss per edge).
inline Vec edge_load(const StripGrid& g, int j, const std::function<double(double)>& h) {
    const double ht = g.h_theta();
    Vec b = Vec::Zero(g.size());
    for (int i = 0; i < g.n_theta; ++i)
        for (int q = 0; q < 3; ++q) {
            const double w = kGauss3W[q] * ht * h(g.theta(i) + kGauss3[q] * ht);
            b[g.index(i, j)] += w * (1.0 - kGauss3[q]);
            b[g.index(i + 1, j)] += w * kGauss3[q];
        }
    return b;
}

/// b_i = hθ g_i on the outer row (trapezoid rule against the nodal data).
inline Vec outer_nodal_load(const StripGrid& g, std::span<const double> values) {
    Vec b = Vec::Zero(g.size());
    for (int i = 0; i < g.n_theta; ++i) b[g.index(i, 0)] = g.h_theta() * values[i];
    return b;
}

/// Nodal interpolant of a strip function.
inline Vec interpolate(const StripGrid& g, const StripFunction& f) {
    Vec u(g.size());
    for (int j = 0; j < g.n_y; ++j)
        for (int i = 0; i < g.n_theta; ++i) u[g.index(i, j)] = f(g.theta(i), g.y(j));
    return u;
}

/// Discrete weak p-Laplacian in the strip: R_i = ∫ e^{(p-2)y} |∇u|^{p-2} ∇u·∇φ_i.
inline Vec strip_p_laplace_residual(const StripGrid& g, const Vec& u, double p) {
    const double ht = g.h_theta(), hy = g.h_y();
    Vec R = Vec::Zero(g.size());
    for (int j = 0; j + 1 < g.n_y; ++j)
        for (int i = 0; i < g.n_theta; ++i) {
            const auto nd = q1::nodes(g, i, j);
            for (double xi : kGauss2)
                for (double eta : kGauss2) {
                    const auto dx = q1::dxi(eta), de = q1::deta(xi);
                    double ut = 0, uy = 0;
                    for (int a = 0; a < 4; ++a) {
                        ut += u[nd[a]] * dx[a] / ht;
                        uy += u[nd[a]] * de[a] / hy;
                    }
                    const double y = g.y(j) + eta * hy;
                    const double flux = std::exp((p - 2.0) * y) * std::pow(ut * ut + uy * uy, 0.5 * (p - 2.0));
                    const double w = 0.25 * ht * hy * flux;
                    for (int a = 0; a < 4; ++a) R[nd[a]] += w * (ut * dx[a] / ht + uy * de[a] / hy);
                }
        }
    return R;
}

}  // namespace plap
