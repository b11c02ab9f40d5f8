#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <boost/math/special_functions/legendre.hpp>

#include "plap/errors.hpp"
#include "plap/report.hpp"
#include "plap/strip.hpp"

namespace plap {

/// Nodal Lagrange basis on the Gauss-Lobatto points of [-1, 1], tabulated at Gauss-Legendre points.
struct SemBasis {
    int degree = 8;
    std::vector<double> nodes;
    std::vector<double> qx, qw;
    Eigen::MatrixXd L, D;  ///< (quadrature point, node)

    double lagrange(int a, double x) const {
        double v = 1.0;
        for (int b = 0; b <= degree; ++b)
            if (b != a) v *= (x - nodes[b]) / (nodes[a] - nodes[b]);
        return v;
    }
    double lagrange_derivative(int a, double x) const {
        double s = 0.0;
        for (int c = 0; c <= degree; ++c) {
            if (c == a) continue;
            double v = 1.0 / (nodes[a] - nodes[c]);
            for (int b = 0; b <= degree; ++b)
                if (b != a && b != c) v *= (x - nodes[b]) / (nodes[a] - nodes[b]);
            s += v;
        }
        return s;
    }
};

namespace detail {

inline double newton_root(const std::function<double(double)>& f, const std::function<double(double)>& df, double x) {
    for (int it = 0; it < 100; ++it) {
        const double dx = f(x) / df(x);
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
    }
    return x;
}

}  // namespace detail

inline SemBasis make_sem_basis(int degree, int n_quad) {
    using boost::math::legendre_p;
    using boost::math::legendre_p_prime;
    if (degree < 1 || n_quad < 1) throw DomainError("make_sem_basis: degree and quadrature size must be positive");
    SemBasis b;
    b.degree = degree;
    b.nodes.assign(degree + 1, 0.0);
    b.nodes.front() = -1.0;
    b.nodes.back() = 1.0;
    // interior GLL nodes: roots of P'_degree, from Chebyshev-Gauss-Lobatto guesses
    for (int i = 1; i < degree; ++i) {
        const double x0 = -std::cos(std::numbers::pi * i / degree);
        const int n = degree;
        b.nodes[i] = detail::newton_root([n](double x) { return legendre_p_prime(n, x); },
                                         [n](double x) {
                                             // (1-x²)P'' = 2xP' - n(n+1)P
                                             return (2.0 * x * legendre_p_prime(n, x) - n * (n + 1.0) * legendre_p(n, x)) /
                                                    (1.0 - x * x);
                                         },
                                         x0);
    }
    b.qx.resize(n_quad);
    b.qw.resize(n_quad);
    for (int i = 0; i < n_quad; ++i) {
        const double x0 = -std::cos(std::numbers::pi * (i + 0.75) / (n_quad + 0.5));
        const double x = detail::newton_root([n_quad](double x) { return legendre_p(n_quad, x); },
                                             [n_quad](double x) { return legendre_p_prime(n_quad, x); }, x0);
        const double d = legendre_p_prime(n_quad, x);
        b.qx[i] = x;
        b.qw[i] = 2.0 / ((1.0 - x * x) * d * d);
    }
    b.L.resize(n_quad, degree + 1);
    b.D.resize(n_quad, degree + 1);
    for (int q = 0; q < n_quad; ++q)
        for (int a = 0; a <= degree; ++a) {
            b.L(q, a) = b.lagrange(a, b.qx[q]);
            b.D(q, a) = b.lagrange_derivative(a, b.qx[q]);
        }
    return b;
}

/// Tensor spectral-element mesh of the disk in (r, θ): radial elements on [0, 1], periodic angular elements on
/// [0, span). All nodes at r = 0 are one unknown.
struct DiskGrid {
    int n_r = 16, n_t = 16, degree = 8;
    double span = 2.0 * std::numbers::pi;
    std::vector<double> r_breaks;
    SemBasis basis;

    int radial_nodes() const { return n_r * degree + 1; }
    int angular_nodes() const { return n_t * degree; }
    int size() const { return 1 + (radial_nodes() - 1) * angular_nodes(); }
    int dof(int m, int l) const {
        if (m == 0) return 0;
        const int nt = angular_nodes();
        return 1 + (m - 1) * nt + ((l % nt) + nt) % nt;
    }
    bool on_boundary(int idx) const { return idx >= 1 + (radial_nodes() - 2) * angular_nodes(); }
    double h_t() const { return span / n_t; }
    double r_node(int m) const {
        const int e = std::min(m / degree, n_r - 1), a = m - e * degree;
        return r_breaks[e] + 0.5 * (basis.nodes[a] + 1.0) * (r_breaks[e + 1] - r_breaks[e]);
    }
    double theta_node(int l) const {
        const int e = l / degree, b = l - e * degree;
        return (e + 0.5 * (basis.nodes[b] + 1.0)) * h_t();
    }
};

/// grading > 1 clusters radial elements at the origin: breaks (i / n_r)^grading.
inline DiskGrid make_disk_grid(int n_r, int n_t, int degree, double span = 2.0 * std::numbers::pi,
                               double grading = 1.0) {
    if (n_r < 1 || n_t < 2) throw DomainError("make_disk_grid: need n_r >= 1 and n_t >= 2");
    DiskGrid g;
    g.n_r = n_r;
    g.n_t = n_t;
    g.degree = degree;
    g.span = span;
    for (int i = 0; i <= n_r; ++i) g.r_breaks.push_back(std::pow(double(i) / n_r, grading));
    g.basis = make_sem_basis(degree, degree + 2);
    return g;
}

struct NonlinearOptions {
    double tol = 1e-8;       ///< on ‖R‖ relative to the residual at the harmonic extension
    double delta = 1e-10;    ///< |∇u|² → |∇u|² + δ²
    int max_newton = 60;
    int max_halvings = 30;
};

struct DiskSolution {
    DiskGrid grid;
    Eigen::VectorXd u;
    std::vector<double> history;  ///< relative residual per iteration
    std::vector<double> steps;    ///< accepted step length (0 marks a Picard step)
    double residual = 0.0;

    /// Interpolated value at (r, θ).
    double value(double r, double theta) const {
        const auto& g = grid;
        const auto& B = g.basis;
        int er = 0;
        while (er + 1 < g.n_r && r > g.r_breaks[er + 1]) ++er;
        const double xi = 2.0 * (r - g.r_breaks[er]) / (g.r_breaks[er + 1] - g.r_breaks[er]) - 1.0;
        double t = std::fmod(theta, g.span);
        if (t < 0) t += g.span;
        const int et = std::min(int(t / g.h_t()), g.n_t - 1);
        const double eta = 2.0 * (t - et * g.h_t()) / g.h_t() - 1.0;
        double s = 0.0;
        for (int a = 0; a <= g.degree; ++a) {
            const double la = B.lagrange(a, xi);
            for (int b = 0; b <= g.degree; ++b)
                s += la * B.lagrange(b, eta) * u[g.dof(er * g.degree + a, et * g.degree + b)];
        }
        return s;
    }
};

namespace detail {

struct PlapAssembly {
    double energy = 0.0;
    Eigen::VectorXd residual;
    SpMat jacobian;
};

/// Energy (1/p)∫(|∇u|²+δ²)^{p/2}, its gradient, and either the Newton Hessian or the frozen-coefficient matrix.
inline PlapAssembly assemble_plap(const DiskGrid& g, const Eigen::VectorXd& u, double p, double delta, bool newton,
                                  bool want_matrix = true) {
    const auto& B = g.basis;
    const int P = g.degree, nq = int(B.qx.size()), nl = (P + 1) * (P + 1);
    PlapAssembly out;
    out.residual = Eigen::VectorXd::Zero(g.size());
    std::vector<Eigen::Triplet<double>> trip;
    if (want_matrix) trip.reserve(std::size_t(g.n_r) * g.n_t * nl * nl);
    std::vector<int> idx(nl);
    Eigen::VectorXd ul(nl), rl(nl);
    Eigen::MatrixXd Bm(2, nl), Kl(nl, nl);
    const double ht = g.h_t();
    for (int er = 0; er < g.n_r; ++er) {
        const double r0 = g.r_breaks[er], hr = g.r_breaks[er + 1] - r0;
        for (int et = 0; et < g.n_t; ++et) {
            for (int a = 0; a <= P; ++a)
                for (int b = 0; b <= P; ++b) idx[a * (P + 1) + b] = g.dof(er * P + a, et * P + b);
            for (int c = 0; c < nl; ++c) ul[c] = u[idx[c]];
            rl.setZero();
            Kl.setZero();
            for (int i = 0; i < nq; ++i) {
                const double r = r0 + 0.5 * (B.qx[i] + 1.0) * hr;
                for (int j = 0; j < nq; ++j) {
                    const double W = B.qw[i] * B.qw[j] * 0.25 * hr * ht * r;
                    for (int a = 0; a <= P; ++a)
                        for (int b = 0; b <= P; ++b) {
                            const int c = a * (P + 1) + b;
                            Bm(0, c) = 2.0 / hr * B.D(i, a) * B.L(j, b);
                            Bm(1, c) = 2.0 / ht * B.L(i, a) * B.D(j, b) / r;
                        }
                    const Eigen::Vector2d gr = Bm * ul;
                    const double rho = gr.squaredNorm() + delta * delta;
                    const double m = std::pow(rho, 0.5 * (p - 2.0));
                    out.energy += W * std::pow(rho, 0.5 * p) / p;
                    rl.noalias() += (W * m) * (Bm.transpose() * gr);
                    if (want_matrix) {
                        Eigen::Matrix2d Dm = m * Eigen::Matrix2d::Identity();
                        if (newton && p != 2.0) Dm += (m * (p - 2.0) / rho) * gr * gr.transpose();
                        Kl.noalias() += W * (Bm.transpose() * Dm * Bm);
                    }
                }
            }
            for (int c = 0; c < nl; ++c) out.residual[idx[c]] += rl[c];
            if (want_matrix)
                for (int c = 0; c < nl; ++c)
                    for (int d = 0; d < nl; ++d) trip.emplace_back(idx[c], idx[d], Kl(c, d));
        }
    }
    if (want_matrix) {
        out.jacobian.resize(g.size(), g.size());
        out.jacobian.setFromTriplets(trip.begin(), trip.end());
    }
    return out;
}

inline Eigen::VectorXd restrict_free(const DiskGrid& g, const Eigen::VectorXd& x) {
    const int nf = 1 + (g.radial_nodes() - 2) * g.angular_nodes();
    return x.head(nf);
}

inline Eigen::VectorXd solve_free(const SpMat& K, const Eigen::VectorXd& rhs) {
    const int nf = int(rhs.size());
    const SpMat Kf = K.topLeftCorner(nf, nf);
    Eigen::SimplicialLDLT<SpMat> ldlt(Kf);
    if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd x = ldlt.solve(rhs);
        if (ldlt.info() == Eigen::Success && x.allFinite()) return x;
    }
    Eigen::SparseLU<SpMat> lu(Kf);
    if (lu.info() != Eigen::Success) throw ConvergenceError("disk solver: linear solve failed", {});
    return lu.solve(rhs);
}

}  // namespace detail

/// Weak p-Laplace Dirichlet problem on the unit disk by damped Newton with Picard fallback.
inline DiskSolution solve_p_laplace_dirichlet(const std::function<double(double)>& gdata, double p, const DiskGrid& g,
                                              NonlinearOptions opt = {}) {
    if (!(p > 1.0)) throw DomainError("solve_p_laplace_dirichlet: p must exceed 1");
    DiskSolution sol;
    sol.grid = g;
    sol.u = Eigen::VectorXd::Zero(g.size());
    const int mb = g.radial_nodes() - 1;
    for (int l = 0; l < g.angular_nodes(); ++l) sol.u[g.dof(mb, l)] = gdata(g.theta_node(l));

    // round-off scale: the residual of the data extended by zero
    const double r_ref = detail::restrict_free(g, detail::assemble_plap(g, sol.u, p, opt.delta, false, false).residual).norm();
    // harmonic extension as the starting point
    {
        const auto a = detail::assemble_plap(g, sol.u, 2.0, 0.0, true);
        const Eigen::VectorXd rf = detail::restrict_free(g, a.residual);
        if (rf.norm() > 0.0) sol.u.head(rf.size()) -= detail::solve_free(a.jacobian, rf);
    }
    if (p == 2.0) {
        sol.history = {0.0};
        return sol;
    }
    auto cur = detail::assemble_plap(g, sol.u, p, opt.delta, true);
    // relative to the harmonic start; a start already at round-off level counts as converged
    const double r0 = detail::restrict_free(g, cur.residual).norm();
    if (r0 <= 1e-12 * r_ref) {
        sol.history = {0.0};
        return sol;
    }
    auto rel = [&](const detail::PlapAssembly& a) { return detail::restrict_free(g, a.residual).norm() / r0; };
    sol.history.push_back(rel(cur));
    for (int it = 0; it < opt.max_newton && sol.history.back() > opt.tol; ++it) {
        bool accepted = false;
        for (bool newton : {true, false}) {
            const auto sys = newton ? cur : detail::assemble_plap(g, sol.u, p, opt.delta, false);
            const Eigen::VectorXd step = -detail::solve_free(sys.jacobian, detail::restrict_free(g, cur.residual));
            double t = 1.0;
            for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
                Eigen::VectorXd trial = sol.u;
                trial.head(step.size()) += t * step;
                auto nxt = detail::assemble_plap(g, trial, p, opt.delta, true);
                if (nxt.energy < cur.energy || rel(nxt) < 1e-3 * sol.history.back()) {
                    sol.u = std::move(trial);
                    cur = std::move(nxt);
                    sol.steps.push_back(newton ? t : 0.0);
                    accepted = true;
                    break;
                }
            }
            if (accepted) break;
        }
        sol.history.push_back(rel(cur));
        if (!accepted) break;
    }
    sol.residual = sol.history.back();
    if (!(sol.residual <= opt.tol)) {
        std::ostringstream os;
        os << "solve_p_laplace_dirichlet: stagnated at relative residual " << sol.residual << " after "
           << sol.history.size() - 1 << " iterations";
        throw ConvergenceError(os.str(), sol.history);
    }
    return sol;
}

/// ‖u - u*‖ / ‖u*‖ in L²(disk) by the element quadrature.
inline double relative_l2_error(const DiskSolution& s, const std::function<double(double, double)>& exact) {
    const auto& g = s.grid;
    const auto& B = g.basis;
    const int P = g.degree, nq = int(B.qx.size());
    double e2 = 0.0, u2 = 0.0;
    for (int er = 0; er < g.n_r; ++er) {
        const double r0 = g.r_breaks[er], hr = g.r_breaks[er + 1] - r0;
        for (int et = 0; et < g.n_t; ++et)
            for (int i = 0; i < nq; ++i) {
                const double r = r0 + 0.5 * (B.qx[i] + 1.0) * hr;
                for (int j = 0; j < nq; ++j) {
                    const double t = (et + 0.5 * (B.qx[j] + 1.0)) * g.h_t();
                    double uh = 0.0;
                    for (int a = 0; a <= P; ++a)
                        for (int b = 0; b <= P; ++b) uh += B.L(i, a) * B.L(j, b) * s.u[g.dof(er * P + a, et * P + b)];
                    const double ue = exact(r, t), W = B.qw[i] * B.qw[j] * 0.25 * hr * g.h_t() * r;
                    e2 += W * (uh - ue) * (uh - ue);
                    u2 += W * ue * ue;
                }
            }
    }
    return std::sqrt(e2 / u2);
}

/// Mean of the boundary values over the full circle, minus the value at the centre.
inline double boundary_mean_minus_center(const DiskSolution& s) {
    const auto& g = s.grid;
    const int mb = g.radial_nodes() - 1;
    double acc = 0.0, w = 0.0;
    for (int et = 0; et < g.n_t; ++et)
        for (int j = 0; j < int(g.basis.qx.size()); ++j) {
            double v = 0.0;
            for (int b = 0; b <= g.degree; ++b) v += g.basis.L(j, b) * s.u[g.dof(mb, et * g.degree + b)];
            acc += g.basis.qw[j] * v;
            w += g.basis.qw[j];
        }
    return acc / w - s.u[0];
}

}  // namespace plap
