#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "plap/kernel.hpp"
#include "plap/quasiradial.hpp"
#include "plap/report.hpp"
#include "plap/weighted.hpp"

namespace plap {

struct LinearSystem {
    StripGrid grid;
    SpMat matrix;
    Vec rhs;
    DenseMat left_kernel;   ///< empty until compute_kernels
    DenseMat right_kernel;
};

/// q, τ sampled at the strip's θ nodes.
inline BoundaryData boundary_on_grid(const StripGrid& g, const CoefficientField& A) {
    const auto& pp = A.params();
    BoundaryData bd;
    for (int i = 0; i < g.n_theta; ++i) {
        const double t = g.theta(i), a = A.profile().value(t), s = A.profile().slope(t);
        bd.theta_grid.push_back(t);
        bd.q.push_back(q_of(a, s, pp.k, pp.p));
        bd.tau.push_back(tau_of(a, s, pp.k, pp.p));
    }
    return bd;
}

/// Matrix of D(φ_i, φ_j) with the natural (oblique) condition built in; zero right-hand side.
inline LinearSystem assemble_operator(const StripGrid& g, const CoefficientField& A, AssemblyOptions opts = {}) {
    return {g, assemble_dirichlet(g, A, opts), Vec::Zero(g.size()), {}, {}};
}

/// ∂v/∂n* + τ v_θ = ψ/q at y = 0: load b_i = ∫ φ_i ψ/q dθ (trapezoid).
inline LinearSystem apply_oblique_bc(LinearSystem sys, const BoundaryData& bd) {
    const auto& g = sys.grid;
    if (int(bd.q.size()) != g.n_theta || int(bd.psi.size()) != g.n_theta)
        throw DomainError("apply_oblique_bc: boundary data does not match the grid");
    std::vector<double> h(g.n_theta);
    for (int i = 0; i < g.n_theta; ++i) {
        if (!(bd.q[i] > 0.0)) throw DomainError("apply_oblique_bc: q must be positive");
        h[i] = bd.psi[i] / bd.q[i];
    }
    sys.rhs = outer_nodal_load(g, h);
    return sys;
}

/// Replaces the y = 0 rows by hθ (3v₀ - 4v₁ + v₂)/(2hy) = hθ ψ, i.e. ∂v/∂n = ψ.
inline LinearSystem apply_neumann_rows(LinearSystem sys, const BoundaryData& bd) {
    const auto& g = sys.grid;
    if (int(bd.psi.size()) != g.n_theta) throw DomainError("apply_neumann_rows: boundary data does not match the grid");
    std::vector<Eigen::Triplet<double>> t;
    for (int c = 0; c < sys.matrix.outerSize(); ++c)
        for (SpMat::InnerIterator it(sys.matrix, c); it; ++it)
            if (!g.on_outer(int(it.row()))) t.emplace_back(it.row(), it.col(), it.value());
    const double s = g.h_theta() / (2.0 * g.h_y());
    Vec rhs = Vec::Zero(g.size());
    for (int i = 0; i < g.n_theta; ++i) {
        t.emplace_back(g.index(i, 0), g.index(i, 0), 3.0 * s);
        t.emplace_back(g.index(i, 0), g.index(i, 1), -4.0 * s);
        t.emplace_back(g.index(i, 0), g.index(i, 2), s);
        rhs[g.index(i, 0)] = g.h_theta() * bd.psi[i];
    }
    sys.matrix.setZero();
    sys.matrix.setFromTriplets(t.begin(), t.end());
    sys.matrix.makeCompressed();
    sys.rhs = rhs;
    return sys;
}

inline void compute_kernels(LinearSystem& sys, KernelOptions opt = {}) {
    sys.left_kernel = near_kernel(sys.matrix, true, opt).basis;
    sys.right_kernel = near_kernel(sys.matrix, false, opt).basis;
    if (sys.left_kernel.cols() != sys.right_kernel.cols())
        throw ConvergenceError("compute_kernels: left and right near-kernel dimensions differ", {});
}

/// ψ₀ minus its components along the kernel traces E in the pairing ∑ E ψ/q, rescaled to ∫ψ = M.
inline std::vector<double> orthogonalized_psi(const DenseMat& traces, std::span<const double> q,
                                              std::vector<double> psi0, double M, int N) {
    const int n = int(psi0.size()), m = int(traces.cols());
    if (m > 0) {
        Eigen::MatrixXd G(m, m);
        Eigen::VectorXd t(m);
        for (int a = 0; a < m; ++a) {
            t[a] = 0.0;
            for (int i = 0; i < n; ++i) t[a] += traces(i, a) * psi0[i] / q[i];
            for (int b = 0; b < m; ++b) {
                G(a, b) = 0.0;
                for (int i = 0; i < n; ++i) G(a, b) += traces(i, a) * traces(i, b) / q[i];
            }
        }
        const Eigen::VectorXd c = G.ldlt().solve(t);
        for (int i = 0; i < n; ++i) psi0[i] -= traces.row(i).dot(c);
    }
    const double I = full_circle_integral(psi0, N);
    if (std::abs(I) < 1e-12 * (1.0 + std::abs(M)))
        throw DomainError("orthogonalized_psi: projected data has zero integral, cannot normalize");
    for (double& v : psi0) v *= M / I;
    return psi0;
}

/// Nodal strip solution u(θ, y) = v(e^{-y}, θ) with its stencil gradients.
struct SolutionField {
    StripGrid grid;
    Vec values;
    Vec u_theta, u_y;  ///< centered in θ; centered in y with second-order one-sided ends

    SolutionField() = default;
    SolutionField(StripGrid g, Vec v) : grid(g), values(std::move(v)) {
        if (!values.allFinite()) throw ConvergenceError("SolutionField: non-finite values", {});
        const int nt = g.n_theta, ny = g.n_y;
        const double ht = g.h_theta(), hy = g.h_y();
        u_theta.resize(g.size());
        u_y.resize(g.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nt; ++i) {
                u_theta[g.index(i, j)] = (at(i + 1, j) - at(i - 1, j)) / (2.0 * ht);
                double d;
                if (j == 0) d = (-3.0 * at(i, 0) + 4.0 * at(i, 1) - at(i, 2)) / (2.0 * hy);
                else if (j == ny - 1) d = (3.0 * at(i, j) - 4.0 * at(i, j - 1) + at(i, j - 2)) / (2.0 * hy);
                else d = (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy);
                u_y[g.index(i, j)] = d;
            }
    }

    double at(int i, int j) const { return values[grid.index(i, j)]; }
    /// ∂v/∂n at r = 1; the outward normal is -∂/∂y.
    double normal_derivative(int i) const { return -u_y[grid.index(i, 0)]; }
    /// (1/2π)∫ v(r_j, θ) dθ, by periodicity the mean over one period.
    double circle_average(int j) const {
        double s = 0.0;
        for (int i = 0; i < grid.n_theta; ++i) s += at(i, j);
        return s / grid.n_theta;
    }
    /// |∇u| in the strip, which equals r |∇v| in the disk.
    double gradient_norm(int idx) const { return std::hypot(u_theta[idx], u_y[idx]); }
};

struct LinearSolution {
    SolutionField field;
    SolveReport report;
};

/// Direct sparse solve with iterative refinement; with deflate, bordered by the computed kernels.
inline LinearSolution solve_linear(const LinearSystem& sys, bool deflate, double tol = 1e-10) {
    DenseMat Zl(sys.grid.size(), 0), Zr(sys.grid.size(), 0);
    if (deflate) {
        if (sys.left_kernel.cols() == 0 && sys.right_kernel.cols() == 0) {
            LinearSystem tmp = sys;
            compute_kernels(tmp);
            Zl = tmp.left_kernel;
            Zr = tmp.right_kernel;
        } else {
            Zl = sys.left_kernel;
            Zr = sys.right_kernel;
        }
    }
    if (sys.rhs.norm() == 0.0) {
        SolveReport rep;
        rep.x = Vec::Zero(sys.grid.size());
        rep.history = {0.0};
        rep.deflated.assign(Zl.cols(), 0.0);
        return {SolutionField(sys.grid, rep.x), rep};
    }
    // the left kernel enters the load through diag|L|, so any incompatible part is removed with the local row scale
    const Vec d = sys.matrix.diagonal().cwiseAbs();
    const DenseMat cols = d.asDiagonal() * Zl;
    auto rep = bordered_solve(sys.matrix, sys.rhs, cols, Zr, tol);
    return {SolutionField(sys.grid, rep.x), rep};
}

/// ∫₀^{2π} ∂v/∂n(1, θ) dθ, trapezoid over one period times the number of periods.
inline double neumann_integral(const SolutionField& v) {
    double s = 0.0;
    for (int i = 0; i < v.grid.n_theta; ++i) s += v.normal_derivative(i);
    return s * v.grid.h_theta() * (2.0 * std::numbers::pi / v.grid.period);
}

struct MeanValueGap {
    bool found = false;
    bool vacuous = false;
    double r0 = std::numeric_limits<double>::quiet_NaN();
    double gap = 0.0;  ///< |∫v(r₀,·) - ∫v(1,·)|
    std::vector<double> r, gbar;
};

/// First grid radius r₀ < 1 with 2π|g(r₀) - g(1)| > margin M (1 - r₀).
inline MeanValueGap mean_value_gap(const SolutionField& v, double M, double margin = 0.4) {
    MeanValueGap out;
    const auto& g = v.grid;
    for (int j = 0; j < g.n_y; ++j) {
        out.r.push_back(g.r(j));
        out.gbar.push_back(v.circle_average(j));
    }
    const double scale = v.values.cwiseAbs().maxCoeff();
    if (M == 0.0 || (v.values.maxCoeff() - v.values.minCoeff()) <= 1e-14 * std::max(scale, 1.0)) {
        out.vacuous = true;
        return out;
    }
    for (int j = 1; j < g.n_y; ++j) {
        const double gap = 2.0 * std::numbers::pi * std::abs(out.gbar[j] - out.gbar[0]);
        if (gap > margin * std::abs(M) * (1.0 - out.r[j])) {
            out.found = true;
            out.r0 = out.r[j];
            out.gap = gap;
            return out;
        }
    }
    return out;
}

/// Everything produced by one oblique solve with the default (kernel-orthogonalized) ψ.
struct NeumannRun {
    StripGrid grid;
    BoundaryData boundary;
    LinearSolution solution;
    int kernel_dimension = 0;
    double q_distance = 0.0;
};

using AngularData = std::function<double(double)>;

inline NeumannRun solve_neumann(const CoefficientField& A, const StripGrid& g, const AngularData& psi0, double M,
                                KernelOptions opt = {}) {
    NeumannRun run;
    run.grid = g;
    run.boundary = boundary_on_grid(g, A);
    auto sys = assemble_operator(g, A);
    compute_kernels(sys, opt);
    const DenseMat traces = sys.left_kernel.topRows(g.n_theta);
    std::vector<double> p0(g.n_theta);
    for (int i = 0; i < g.n_theta; ++i) p0[i] = psi0(g.theta(i));
    run.boundary.psi = orthogonalized_psi(traces, run.boundary.q, p0, M, A.params().N);
    run.boundary.M = M;
    run.kernel_dimension = int(traces.cols());
    run.q_distance = trace_distance(traces, Eigen::Map<const Vec>(run.boundary.q.data(), g.n_theta));
    sys = apply_oblique_bc(std::move(sys), run.boundary);
    run.solution = solve_linear(sys, true);
    return run;
}

inline CheckReport neumann_check(const NeumannRun& run, double tol = 0.02) {
    const auto& v = run.solution.field;
    const double I = neumann_integral(v);
    const auto gap = mean_value_gap(v, run.boundary.M);
    CheckReport rep{"neumann_experiment", false, {}, {}};
    rep.metric("M", run.boundary.M)
        .metric("neumann_integral", I)
        .metric("relative_error", std::abs(I - run.boundary.M) / std::abs(run.boundary.M))
        .metric("r0", gap.r0)
        .metric("gap", gap.gap)
        .metric("gap_bound", 0.4 * std::abs(run.boundary.M) * (1.0 - gap.r0))
        .metric("kernel_dimension", run.kernel_dimension)
        .metric("q_distance", run.q_distance)
        .metric("solve_residual", run.solution.report.relative_residual);
    for (std::size_t c = 0; c < run.solution.report.deflated.size(); ++c)
        rep.metric("deflated_" + std::to_string(c), run.solution.report.deflated[c]);
    rep.pass = std::abs(I - run.boundary.M) <= tol * std::abs(run.boundary.M) && gap.found;
    if (!gap.found) rep.detail = "no radius r0 with the required circle-average gap";
    return rep;
}

/// Least-squares slope of log|g(y) - μ| against y on the window; μ is the far-field average.
inline std::pair<double, double> fit_decay(const SolutionField& v, double y_lo, double y_hi) {
    const auto& g = v.grid;
    const double mu = v.circle_average(g.n_y - 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = 0; j < g.n_y; ++j) {
        const double y = g.y(j), d = std::abs(v.circle_average(j) - mu);
        if (y < y_lo || y > y_hi || !(d > 0.0)) continue;
        const double l = std::log(d);
        sx += y;
        sy += l;
        sxx += y * y;
        sxy += y * l;
        ++n;
    }
    if (n < 3) return {std::numeric_limits<double>::quiet_NaN(), mu};
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {-slope, mu};
}

/// Max principle, gradient stability and far-field decay over a sequence of grids.
inline CheckReport regularity_probe(const CoefficientField& A, const std::vector<StripGrid>& grids,
                                    const AngularData& psi0, double M, double rel_tol = 1e-8) {
    CheckReport rep{"regularity", false, {}, {}};
    std::vector<double> sup_grad;
    bool max_ok = true;
    double gamma = 0.0, mu = 0.0;
    for (std::size_t s = 0; s < grids.size(); ++s) {
        const auto run = solve_neumann(A, grids[s], psi0, M);
        const auto& v = run.solution.field;
        const auto& g = v.grid;
        double bmax = -std::numeric_limits<double>::infinity(), imax = bmax, gmax = 0.0;
        for (int idx = 0; idx < g.size(); ++idx) {
            double& m = g.on_outer(idx) ? bmax : imax;
            m = std::max(m, v.values[idx]);
            gmax = std::max(gmax, v.gradient_norm(idx));
        }
        const double scale = v.values.cwiseAbs().maxCoeff();
        const double viol = imax - bmax;
        max_ok = max_ok && viol <= rel_tol * scale;
        sup_grad.push_back(gmax);
        const std::string tag = "_" + std::to_string(g.n_theta) + "x" + std::to_string(g.n_y);
        rep.metric("sup_abs_v" + tag, scale).metric("sup_grad" + tag, gmax).metric("max_principle_excess" + tag, viol / scale);
        std::tie(gamma, mu) = fit_decay(v, 0.5, 0.5 * g.y_max);
    }
    const double var = sup_grad.size() >= 2
                           ? std::abs(sup_grad.back() - sup_grad[sup_grad.size() - 2]) / sup_grad.back()
                           : std::numeric_limits<double>::quiet_NaN();
    rep.metric("sup_grad_variation", var).metric("gamma", gamma).metric("far_field_mean", mu);
    rep.pass = max_ok && var < 0.1 && gamma > 0.0;
    if (!max_ok) rep.detail = "interior maximum exceeds the boundary maximum";
    else if (!(var < 0.1)) rep.detail = "sup |grad u| not stable under refinement";
    else if (!(gamma > 0.0)) rep.detail = "no decay of circle averages";
    return rep;
}

/// Smooth period-2π/N strip function with the derivatives needed for its flux.
struct StripJet {
    double u, t, y, tt, ty, yy;
};
using StripExact = std::function<StripJet(double theta, double y)>;

inline StripExact default_manufactured(int N) {
    return [N](double t, double y) {
        const double c = std::cos(N * t), s = std::sin(N * t);
        const double c2 = std::cos(2 * N * t + 0.4), s2 = std::sin(2 * N * t + 0.4);
        const double e1 = std::exp(-y), e2 = std::exp(-2 * y);
        const double A = (1 + 0.5 * y) * e1, Ay = (-0.5 - 0.5 * y) * e1, Ayy = (0.5 * y) * e1;
        const double B = 0.3 * e2, By = -0.6 * e2, Byy = 1.2 * e2;
        const double n = N, n2 = 2.0 * N;
        StripJet j;
        j.u = A * c + B * s2 + 0.2 * y * e1;
        j.t = -n * A * s + n2 * B * c2;
        j.y = Ay * c + By * s2 + 0.2 * (1 - y) * e1;
        j.tt = -n * n * A * c - n2 * n2 * B * s2;
        j.ty = -n * Ay * s + n2 * By * c2;
        j.yy = Ayy * c + Byy * s2 + 0.2 * (y - 2) * e1;
        return j;
    };
}

/// Load vector whose exact discrete counterpart is the continuous solution u*: f = -div(w K ∇u*) in the
/// strip plus the natural fluxes on y = 0 and y = y_max.
inline Vec manufactured_load(const StripGrid& g, const CoefficientField& A, const StripExact& ex) {
    const double alpha = A.params().alpha_space;
    auto f = [&](double t, double y) {
        const auto K = strip_matrix(A.angular_jet(t));
        const auto u = ex(t, y);
        const double w = std::exp(-2.0 * alpha * y);
        const double dth = K.rr.d * u.t + K.rr.v * u.tt + K.rt.d * u.y + K.rt.v * u.ty;
        const double dy = -2.0 * alpha * (K.rt.v * u.t + K.tt.v * u.y) + K.rt.v * u.ty + K.tt.v * u.yy;
        return -w * (dth + dy);
    };
    auto edge = [&](double y) {
        const double r = std::exp(-y), w = std::exp(-2.0 * alpha * y);
        return [&A, &ex, y, r, w](double t) {
            const auto K = strip_matrix(A.angular(t));
            const auto u = ex(t, y);
            return w * (K.rt * u.t + K.tt * u.y) + skew_c(A, r, t) * u.t;
        };
    };
    Vec b = domain_load(g, f);
    b -= edge_load(g, 0, edge(0.0));
    b += edge_load(g, g.n_y - 1, edge(g.y_max));
    return b;
}

struct ConvergenceStudy {
    std::vector<int> n;
    std::vector<double> errors, orders, residuals, deflated;
};

/// Interior L² error of the deflated solve against u* (up to the constant in the kernel) over grid halvings.
inline ConvergenceStudy manufactured_convergence(const CoefficientField& A, const std::vector<int>& sizes,
                                                 const StripExact& ex) {
    ConvergenceStudy st;
    for (int n : sizes) {
        const auto g = make_strip_grid(A.params(), n, n);
        auto sys = assemble_operator(g, A);
        compute_kernels(sys);
        sys.rhs = manufactured_load(g, A, ex);
        const auto sol = solve_linear(sys, true);
        Vec exact(g.size());
        for (int j = 0; j < g.n_y; ++j)
            for (int i = 0; i < g.n_theta; ++i) exact[g.index(i, j)] = ex(g.theta(i), g.y(j)).u;
        Vec diff = sol.field.values - exact;
        double shift = 0.0;
        int cnt = 0;
        for (int idx = 0; idx < g.size(); ++idx)
            if (!g.on_outer(idx) && !g.on_inner(idx)) shift += diff[idx], ++cnt;
        shift /= cnt;
        double e2 = 0.0, u2 = 0.0;
        for (int idx = 0; idx < g.size(); ++idx)
            if (!g.on_outer(idx) && !g.on_inner(idx)) {
                e2 += (diff[idx] - shift) * (diff[idx] - shift);
                u2 += exact[idx] * exact[idx];
            }
        st.n.push_back(n);
        st.errors.push_back(std::sqrt(e2 / u2));
        st.residuals.push_back(sol.report.relative_residual);
        st.deflated.push_back(sol.report.deflated.empty() ? 0.0 : sol.report.deflated.front());
    }
    st.orders = observed_orders(st.errors);
    return st;
}

inline CheckReport manufactured_check(const ConvergenceStudy& st, double min_order = 1.8) {
    CheckReport rep{"manufactured_solution", true, {}, {}};
    for (std::size_t s = 0; s < st.n.size(); ++s) {
        const std::string tag = "_" + std::to_string(st.n[s]);
        rep.metric("l2_error" + tag, st.errors[s]).metric("residual" + tag, st.residuals[s]);
    }
    for (std::size_t s = 0; s < st.orders.size(); ++s) {
        rep.metric("order_" + std::to_string(s), st.orders[s]);
        if (!(st.orders[s] >= min_order)) rep.pass = false;
    }
    if (st.orders.empty()) rep.pass = false;
    return rep;
}

/// Max over interior nodes with y in [y_lo, y_hi] of |(L Πv)_i / (hθ hy r²) - (T v)(node)|, relative to max |T v|.
inline double fem_expanded_gap(const StripGrid& g, const CoefficientField& A, const PolarField& v, double y_lo,
                               double y_hi) {
    const SpMat L = assemble_dirichlet(g, A);
    const Vec u = interpolate(g, [&](double t, double y) { return v(std::exp(-y), t).v; });
    const Vec Lu = L * u;
    double err = 0.0, ref = 0.0;
    for (int j = 1; j + 1 < g.n_y; ++j) {
        if (g.y(j) < y_lo || g.y(j) > y_hi) continue;
        const double r = g.r(j);
        for (int i = 0; i < g.n_theta; ++i) {
            const double t = g.theta(i);
            const double tv = apply_T(A, v(r, t), r, t);
            const double fem = Lu[g.index(i, j)] / (g.h_theta() * g.h_y() * r * r);
            err = std::max(err, std::abs(fem - tv));
            ref = std::max(ref, std::abs(tv));
        }
    }
    return err / ref;
}

/// ‖[R(f + εw) - R(f)]/ε - L w‖ / ‖L w‖ on interior rows, with R the strip p-Laplace residual and L without the skew part.
inline double linearization_gap(const StripGrid& g, const CoefficientField& A, const Vec& w, double eps) {
    const auto& prof = A.profile();
    const double k = A.params().k, p = A.params().p;
    const Vec f = interpolate(g, [&](double t, double y) { return std::exp(-k * y) * prof.value(t); });
    const Vec dq = (strip_p_laplace_residual(g, f + eps * w, p) - strip_p_laplace_residual(g, f, p)) / eps;
    const Vec Lw = assemble_dirichlet(g, A, {false}) * w;
    double e2 = 0.0, l2 = 0.0;
    for (int idx = 0; idx < g.size(); ++idx) {
        if (g.on_outer(idx) || g.on_inner(idx)) continue;
        e2 += (dq[idx] - Lw[idx]) * (dq[idx] - Lw[idx]);
        l2 += Lw[idx] * Lw[idx];
    }
    return std::sqrt(e2 / l2);
}

/// Smooth random strip field Σ c_m cos(m N θ + φ_m) e^{-d_m y}.
inline Vec random_smooth_field(const StripGrid& g, int N, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0), D(0.5, 2.0), P(0.0, 2.0 * std::numbers::pi);
    std::array<double, 4> c, ph, d;
    for (int m = 0; m < 4; ++m) c[m] = U(rng), ph[m] = P(rng), d[m] = D(rng);
    return interpolate(g, [&](double t, double y) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += c[m] * std::cos(m * N * t + ph[m]) * std::exp(-d[m] * y);
        return s;
    });
}

}  // namespace plap
