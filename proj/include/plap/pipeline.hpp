#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "plap/algebra.hpp"
#include "plap/disk.hpp"
#include "plap/solver.hpp"
#include "plap/weighted.hpp"

namespace plap {

/// Closed forms of k at p = 4 and the p → 2⁺ limit of the larger root.
inline CheckReport check_exponents() {
    CheckReport rep{"exponent_closed_forms", true, {}, {}};
    const double e1 = std::abs(solve_exponent(4.0, 1) - 1.0);
    const double e2 = std::abs(solve_exponent(4.0, 2) - (11.0 + std::sqrt(13.0)) / 9.0);
    const double e3 = std::abs(solve_exponent(4.0, 3) - (23.0 + std::sqrt(124.0)) / 15.0);
    rep.metric("k41_error", e1).metric("k42_error", e2).metric("k43_error", e3);
    rep.pass = e1 < 1e-12 && e2 < 1e-12 && e3 < 1e-12;
    for (int N = 1; N <= 3; ++N) {
        double prev = std::numeric_limits<double>::infinity();
        bool mono = true;
        for (int m = 1; m <= 6; ++m) {
            const double gap = std::abs(N - solve_exponent(2.0 + std::pow(10.0, -m), N));
            mono = mono && gap <= prev + 1e-15;
            prev = gap;
        }
        rep.metric("limit_gap_N" + std::to_string(N), prev);
        rep.pass = rep.pass && mono && prev < 1e-5;
    }
    return rep;
}

inline std::size_t default_profile_nodes(double p) { return p > 4.0 ? 1024 : 512; }

/// (4,1) reproduces cos θ; the ODE profile matches the normalized parametrization on {3,4,6} × {2,3}.
inline CheckReport check_profile_exactness() {
    CheckReport rep{"profile_exactness", true, {}, {}};
    const auto c = profile_ode(make_params(4.0, 1), 512, 1e-8);
    double err = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) err = std::max(err, std::abs(c.a()[j] - std::cos(c.theta_grid()[j])));
    rep.metric("cosine_error", err);
    rep.pass = err < 1e-8;
    std::vector<double> t;
    for (int i = -300; i <= 300; ++i) t.push_back(std::sinh(i / 30.0));
    for (double p : {3.0, 4.0, 6.0})
        for (int N : {2, 3}) {
            const auto pp = make_params(p, N);
            const auto prof = profile_ode(pp, default_profile_nodes(p), 1e-8);
            double worst = 0.0;
            for (const auto& pt : profile_parametric(pp, t))
                worst = std::max(worst, std::abs(prof.value(pt.theta) - pt.a_raw / prof.norm_constant()));
            rep.metric("parametric_gap_p" + std::to_string(int(p)) + "_N" + std::to_string(N), worst);
            rep.pass = rep.pass && worst < 1e-6;
        }
    return rep;
}

/// Observed order of the discrete Δ_p residual of r^k a(θ) on 0.25 <= r <= 0.9.
inline CheckReport check_p_harmonicity(const AngularProfile& prof, double min_order = 1.9) {
    const auto probes = annulus_probes(0.25, 0.9, 6, 24);
    const std::vector<double> h = {0.04, 0.02, 0.01, 0.005};
    const auto res = p_laplace_residual(quasiradial_field(prof), prof.params().p, h, probes);
    CheckReport rep{"p_harmonicity", true, {}, {}};
    for (std::size_t i = 0; i < res.size(); ++i) rep.metric("residual_h" + std::to_string(i), res[i]);
    const auto ord = observed_orders(res);
    for (std::size_t i = 0; i < ord.size(); ++i) {
        rep.metric("order_" + std::to_string(i), ord[i]);
        rep.pass = rep.pass && ord[i] >= min_order;
    }
    return rep;
}

/// det A against its closed form, symmetry, and the eigen ratio p - 1 at random points.
inline CheckReport check_coefficients(const CoefficientField& F, int n_points, std::uint64_t seed) {
    const auto& pp = F.params();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(0.05, 1.0), ut(0.0, 2.0 * std::numbers::pi);
    double det_err = 0.0, ratio_err = 0.0, vec_res = 0.0, asym = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double r = ur(rng), th = ut(rng);
        const auto A = F(r, th);
        const double a = F.profile().value(th), s = F.profile().slope(th);
        const double det =
            (pp.p - 1) * std::pow(r, 2 * (pp.p - 2) * (pp.k - 1)) * std::pow(s * s + pp.k * pp.k * a * a, pp.p - 2);
        det_err = std::max(det_err, std::abs(A.determinant() - det) / det);
        asym = std::max(asym, std::abs(A(0, 1) - A(1, 0)));
        const auto e = eigen_pair(F, r, th);
        ratio_err = std::max(ratio_err, std::abs(e.mu_plus / e.mu_minus - (pp.p - 1)));
        vec_res = std::max({vec_res, (A * e.v_plus - e.mu_plus * e.v_plus).norm() / A.norm(),
                            (A * e.v_minus - e.mu_minus * e.v_minus).norm() / A.norm()});
    }
    CheckReport rep{"coefficients", false, {}, {}};
    rep.metric("points", n_points)
        .metric("det_rel_error", det_err)
        .metric("asymmetry", asym)
        .metric("eigen_ratio_error", ratio_err)
        .metric("eigenvector_residual", vec_res);
    rep.pass = det_err < 1e-12 && asym == 0.0 && ratio_err < 1e-12 && vec_res < 1e-12;
    return rep;
}

/// The five polar test fields of the energy comparison.
inline std::vector<PolarField> energy_test_fields(int N) {
    using namespace fields;
    return {
        separable(power(1), cosine(N)),
        separable(power(2), sine(2 * N)),
        sum({{1.0, separable(exponential(1.0), cosine(2))}, {0.5, separable(power(1), sine(1))}}),
        sum({{1.0, separable(power(3), cosine(3))}, {-1.0, separable(power(5), cosine(3))}}),
        sum({{1.0, separable(power(2), unit())}, {0.3, separable(power(4), sine(N))}}),
    };
}

inline CheckReport check_energy(const CoefficientField& A, double tol = 1e-6) {
    const auto q = make_quadrature(1e-6, 4000, 128);
    CheckReport rep{"energy_change_of_variables", true, {}, {}};
    double worst = 0.0;
    for (const auto& f : energy_test_fields(A.params().N)) {
        const auto r = strip_energy_check(f, A, q, tol);
        worst = std::max(worst, r.get("relative_difference"));
        rep.pass = rep.pass && r.pass;
    }
    const double split = std::abs(A.params().alpha_strip - A.params().alpha_space - 1.0);
    rep.metric("max_relative_difference", worst).metric("alpha_strip_minus_alpha_space_minus_1", split);
    return rep;
}

/// p = 2 harmonic sanity, then the Dirichlet problem with data a(θ) must reproduce r^k a(θ).
inline CheckReport check_nonlinear(const AngularProfile& prof, const DiskGrid& g, double tol = 0.01) {
    CheckReport rep{"nonlinear_cross_check", false, {}, {}};
    const auto h = solve_p_laplace_dirichlet([](double t) { return std::cos(2.0 * t); }, 2.0, g);
    const double eh = relative_l2_error(h, [](double r, double t) { return r * r * std::cos(2.0 * t); });
    const auto s = solve_p_laplace_dirichlet([&](double t) { return prof.value(t); }, prof.params().p, g);
    const double eq = relative_l2_error(s, [&](double r, double t) { return eval_f(prof, r, t); });
    rep.metric("p", prof.params().p)
        .metric("N", prof.params().N)
        .metric("grid_nodes_r", g.radial_nodes())
        .metric("grid_nodes_theta", g.angular_nodes())
        .metric("harmonic_rel_l2", eh)
        .metric("quasiradial_rel_l2", eq)
        .metric("newton_iterations", double(s.history.size() - 1))
        .metric("newton_residual", s.residual);
    rep.pass = eh < 1e-6 && eq < tol;
    return rep;
}

/// Coercivity scan plus adjoint kernel dimension under one refinement and the distance of q from its traces.
inline CheckReport check_fredholm(const CoefficientField& A, int n_theta, int n_y,
                                  const std::vector<double>& c2_scan = {1, 10, 100, 1000}) {
    const auto& pp = A.params();
    const auto coarse = make_strip_grid(pp, n_theta, n_y);
    const auto fine = make_strip_grid(pp, 2 * n_theta, 2 * n_y);
    auto rep = coercivity_check(coarse, A, c2_scan);
    rep.name = "coercivity_fredholm";
    int dims[2];
    double dist = 1.0;
    for (int s = 0; s < 2; ++s) {
        const auto& g = s == 0 ? coarse : fine;
        const auto E = adjoint_kernel(assemble_dirichlet(g, A), g);
        dims[s] = E.dimension();
        const std::string tag = s == 0 ? "_coarse" : "_fine";
        rep.metric("kernel_dimension" + tag, E.dimension());
        if (E.dimension() > 0) {
            rep.metric("kernel_interior_residual" + tag, E.interior_residual[0]);
            if (E.singular_values.size() > std::size_t(E.dimension()))
                rep.metric("next_singular_value" + tag, E.singular_values[E.dimension()]);
        }
        dist = trace_distance(E.trace(g), boundary_q_on_grid(g, A));
        rep.metric("q_distance" + tag, dist);
    }
    const bool stable = dims[0] == dims[1];
    rep.pass = rep.pass && stable && dist > 1e-3;
    if (!stable) rep.detail = "adjoint kernel dimension changes under refinement";
    else if (!(dist > 1e-3)) rep.detail = "q lies in the span of the kernel traces";
    return rep;
}

}  // namespace plap
