#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/SparseCholesky>

#include "plap/kernel.hpp"
#include "plap/strip.hpp"

namespace plap {

/// Value and derivatives up to second order of a field in polar coordinates.
struct PolarJet {
    double v = 0, r = 0, t = 0, rr = 0, rt = 0, tt = 0;
};

using PolarField = std::function<PolarJet(double r, double theta)>;

/// f, f', f'' of a one-variable factor.
using Jet1 = std::array<double, 3>;
using Factor = std::function<Jet1(double)>;

namespace fields {

inline Factor power(double m) {
    return [m](double r) {
        return Jet1{std::pow(r, m), m * std::pow(r, m - 1), m * (m - 1) * std::pow(r, m - 2)};
    };
}
inline Factor cosine(double m) {
    return [m](double t) { return Jet1{std::cos(m * t), -m * std::sin(m * t), -m * m * std::cos(m * t)}; };
}
inline Factor sine(double m) {
    return [m](double t) { return Jet1{std::sin(m * t), m * std::cos(m * t), -m * m * std::sin(m * t)}; };
}
inline Factor unit() {
    return [](double) { return Jet1{1.0, 0.0, 0.0}; };
}
inline Factor exponential(double c) {
    return [c](double r) {
        const double e = std::exp(c * r);
        return Jet1{e, c * e, c * c * e};
    };
}
inline Factor profile(std::shared_ptr<const AngularProfile> prof) {
    return [prof](double t) { return Jet1{prof->value(t), prof->slope(t), prof->curvature(t)}; };
}

inline PolarField separable(Factor R, Factor Th) {
    return [R, Th](double r, double t) {
        const auto a = R(r), b = Th(t);
        return PolarJet{a[0] * b[0], a[1] * b[0], a[0] * b[1], a[2] * b[0], a[1] * b[1], a[0] * b[2]};
    };
}
inline PolarField constant(double c) {
    return [c](double, double) { return PolarJet{c}; };
}
inline PolarField sum(std::vector<std::pair<double, PolarField>> parts) {
    return [parts](double r, double t) {
        PolarJet out;
        for (const auto& [w, f] : parts) {
            const auto j = f(r, t);
            out.v += w * j.v;
            out.r += w * j.r;
            out.t += w * j.t;
            out.rr += w * j.rr;
            out.rt += w * j.rt;
            out.tt += w * j.tt;
        }
        return out;
    };
}

}  // namespace fields

/// Composite Simpson in r on [ε, 1] and the trapezoid rule in θ on [0, span).
struct QuadratureRule {
    std::vector<double> r, wr, theta, wt;
    double eps = 1e-6;
};

inline std::vector<std::pair<double, double>> simpson(double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        out.emplace_back(a + i * h, w * h / 3.0);
    }
    return out;
}

inline QuadratureRule make_quadrature(double eps = 1e-6, int n_r = 4000, int n_theta = 256,
                                      double span = 2.0 * std::numbers::pi) {
    QuadratureRule q;
    q.eps = eps;
    for (auto [x, w] : simpson(eps, 1.0, n_r)) {
        q.r.push_back(x);
        q.wr.push_back(w);
    }
    for (int i = 0; i < n_theta; ++i) {
        q.theta.push_back(span * i / n_theta);
        q.wt.push_back(span / n_theta);
    }
    return q;
}

/// ∫ F(r, θ) r dr dθ.
template <class F>
double integrate_disk(const QuadratureRule& q, F&& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.r.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < q.theta.size(); ++j) row += q.wt[j] * f(q.r[i], q.theta[j]);
        acc += q.wr[i] * q.r[i] * row;
    }
    return acc;
}

struct WeightedNorms {
    double y0;
    double y1;
};

/// ‖f‖_{Y0}, ‖f‖_{Y1} with weights r^{2β} and r^{2α}.
inline WeightedNorms weighted_norms(const PolarField& f, const ProblemParams& pp, const QuadratureRule& q) {
    if (!pp.has_beta_window()) throw DomainError("weighted_norms: requires k > 1");
    if (!pp.beta_admissible(pp.beta)) throw DomainError("weighted_norms: beta outside the admissible window");
    double n0 = 0.0, g1 = 0.0;
    n0 = integrate_disk(q, [&](double r, double t) {
        const auto j = f(r, t);
        return j.v * j.v * std::pow(r, 2 * pp.beta);
    });
    g1 = integrate_disk(q, [&](double r, double t) {
        const auto j = f(r, t);
        return (j.r * j.r + j.t * j.t / (r * r)) * std::pow(r, 2 * pp.alpha_space);
    });
    return {std::sqrt(n0), std::sqrt(n0 + g1)};
}

/// Per-angle coefficient data at the nodes of a quadrature rule.
struct AngularCache {
    std::vector<Sym2<double>> m;  ///< ωÃ in the (e_r, e_θ) frame
    std::vector<Sym2<Dual>> m_jet;
    std::vector<double> tau, tau_theta, a, s;
};

inline AngularCache cache_angles(const CoefficientField& A, std::span<const double> theta) {
    AngularCache c;
    const auto& pp = A.params();
    for (double t : theta) {
        c.m.push_back(A.angular(t));
        c.m_jet.push_back(A.angular_jet(t));
        const auto [a, s] = A.profile().jet(t);
        const Dual tau = tau_of(a, s, pp.k, pp.p);
        c.tau.push_back(tau.v);
        c.tau_theta.push_back(tau.d);
        c.a.push_back(a.v);
        c.s.push_back(s.v);
    }
    return c;
}

/// ∫ F(r, j) r dr dθ where j indexes the angular nodes.
template <class F>
double integrate_disk_indexed(const QuadratureRule& q, F&& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.r.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < q.theta.size(); ++j) row += q.wt[j] * f(q.r[i], j);
        acc += q.wr[i] * q.r[i] * row;
    }
    return acc;
}

/// Quadratic energy ∫ <A ∇°v, ∇°v> dA in the disk chart with analytic derivatives.
inline double disk_energy(const PolarField& v, const CoefficientField& A, const QuadratureRule& q) {
    const auto c = cache_angles(A, q.theta);
    return integrate_disk_indexed(q, [&](double r, std::size_t j) {
        const auto jv = v(r, q.theta[j]);
        const double gr = jv.r, gt = jv.t / r;
        const auto& m = c.m[j];
        return A.radial_weight(r) * (m.rr * gr * gr + 2 * m.rt * gr * gt + m.tt * gt * gt);
    });
}

struct StripEnergies {
    double gradient_form;  ///< ∫ <K ∇u, ∇u> e^{-2 α_space y}
    double pulled_back;    ///< ∫ ω <Ã ∇°v, ∇°v> e^{-2 α_strip y}
    double isotropic;      ///< ∫ (a_θ²+k²a²)^{(p-2)/2} |∇u|² e^{-2 α_space y}
};

/// Energies on the strip [0, span) x [0, ln(1/ε)], u(θ, y) = v(e^{-y}, θ), ∇u by fourth-order differences.
inline StripEnergies strip_energies(const PolarField& v, const CoefficientField& A, const QuadratureRule& q,
                                    int n_y = 4000) {
    const auto& pp = A.params();
    const double ymax = -std::log(q.eps), h = 1e-3;
    auto u = [&](double t, double y) { return v(std::exp(-y), t).v; };
    auto d4 = [&](auto&& f, double x) { return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h); };
    const auto c = cache_angles(A, q.theta);
    StripEnergies e{0, 0, 0};
    for (auto [y, wy] : simpson(0.0, ymax, n_y)) {
        double rg = 0, rp = 0, ri = 0;
        for (std::size_t j = 0; j < q.theta.size(); ++j) {
            const double t = q.theta[j];
            const double ut = d4([&](double x) { return u(x, y); }, t);
            const double uy = d4([&](double x) { return u(t, x); }, y);
            const auto& m = c.m[j];
            const auto K = strip_matrix(m);
            rg += q.wt[j] * (K.rr * ut * ut + 2 * K.rt * ut * uy + K.tt * uy * uy);
            const double er = std::exp(y);
            const double gr = -er * uy, gt = er * ut;  // ∇°v pulled back
            rp += q.wt[j] * (m.rr * gr * gr + 2 * m.rt * gr * gt + m.tt * gt * gt);
            const double a = c.a[j], s = c.s[j];
            ri += q.wt[j] * std::pow(s * s + pp.k * pp.k * a * a, 0.5 * (pp.p - 2)) * (ut * ut + uy * uy);
        }
        e.gradient_form += wy * std::exp(-2 * pp.alpha_space * y) * rg;
        e.pulled_back += wy * std::exp(-2 * pp.alpha_strip * y) * rp;
        e.isotropic += wy * std::exp(-2 * pp.alpha_space * y) * ri;
    }
    return e;
}

inline CheckReport strip_energy_check(const PolarField& v, const CoefficientField& A, const QuadratureRule& q,
                                      double tol = 1e-6) {
    const auto& pp = A.params();
    const double ed = disk_energy(v, A, q);
    const auto es = strip_energies(v, A, q);
    const double scale = std::max(std::abs(ed), 1e-300);
    const double rel = std::max(std::abs(ed - es.gradient_form), std::abs(ed - es.pulled_back)) / scale;
    const bool zero = std::abs(ed) < 1e-14 && std::abs(es.gradient_form) < 1e-14;
    CheckReport rep{"strip_energy", zero || rel < tol, {}, {}};
    rep.metric("disk", ed).metric("strip_gradient_form", es.gradient_form).metric("strip_pulled_back", es.pulled_back)
        .metric("relative_difference", zero ? 0.0 : rel).metric("isotropic_bracket", es.isotropic)
        .metric("alpha_space", pp.alpha_space).metric("alpha_strip", pp.alpha_strip);
    if (std::abs(pp.alpha_strip - (pp.alpha_space + 1.0)) > 1e-15) {
        rep.pass = false;
        rep.detail = "alpha_strip != alpha_space + 1";
    }
    return rep;
}

/// div°(A∇°u) through the entrywise expansion of the divergence in the moving frame;
/// m is the θ-jet of ωÃ at the evaluation angle.
inline double expanded_divergence(const ProblemParams& pp, const Sym2<Dual>& m, const PolarJet& u, double r) {
    const double w = std::pow(r, 2.0 * pp.alpha_space), wr = 2.0 * pp.alpha_space / r * w;
    const double a11 = w * m.rr.v, a12 = w * m.rt.v, a22 = w * m.tt.v;
    const double er_a11 = wr * m.rr.v, er_a12 = wr * m.rt.v;
    const double et_a21 = w * m.rt.d / r, et_a22 = w * m.tt.d / r;
    const double er_u = u.r, et_u = u.t / r;
    return a11 * u.rr + 2.0 * a12 * u.rt / r + a22 * u.tt / (r * r) + (er_a11 + a11 / r + et_a21) * er_u +
           (er_a12 + et_a22) * et_u;
}

inline double expanded_divergence(const CoefficientField& A, const PolarJet& u, double r, double theta) {
    return expanded_divergence(A.params(), A.angular_jet(theta), u, r);
}

/// T u = -div°(A∇°u).
inline double apply_T(const CoefficientField& A, const PolarJet& u, double r, double theta) {
    return -expanded_divergence(A, u, r, theta);
}

/// ∫ v T u dA over ε <= r <= 1.
inline double pairing_T(const PolarField& v, const PolarField& u, const CoefficientField& A, const QuadratureRule& q) {
    const auto c = cache_angles(A, q.theta);
    return integrate_disk_indexed(q, [&](double r, std::size_t j) {
        const double t = q.theta[j];
        return -v(r, t).v * expanded_divergence(A.params(), c.m_jet[j], u(r, t), r);
    });
}

/// D(v, u) = ∫ <∇°v, B∇°u> dA + ∫ v {e_θ(c₂₁) e_r(u) + e_r(c₁₂) e_θ(u)} dA over ε <= r <= 1.
inline double dirichlet_form(const PolarField& v, const PolarField& u, const CoefficientField& A,
                             const QuadratureRule& q, bool skew = true) {
    const auto c = cache_angles(A, q.theta);
    return integrate_disk_indexed(q, [&](double r, std::size_t j) {
        const double t = q.theta[j];
        const auto jv = v(r, t), ju = u(r, t);
        const double vr = jv.r, vt = jv.t / r, ur = ju.r, ut = ju.t / r;
        const auto& m = c.m[j];
        const double w = A.radial_weight(r);
        double val = w * (vr * (m.rr * ur + m.rt * ut) + vt * (m.rt * ur + m.tt * ut));
        if (!skew) return val;
        const Dual eta = cutoff(Dual(r, 1.0));
        const double cc = -c.tau[j] * eta.v, c_t = -c.tau_theta[j] * eta.v, c_r = -c.tau[j] * eta.d;
        // C = [[0, -c], [c, 0]]; c₂₁ = c, c₁₂ = -c
        val += vr * (-cc * ut) + vt * (cc * ur);
        val += jv.v * ((c_t / r) * ur - c_r * ut);
        return val;
    });
}

/// ∫_{r=1} v (∂u/∂n* + τ ∂u/∂θ) dθ.
inline double oblique_boundary_term(const PolarField& v, const PolarField& u, const CoefficientField& A,
                                    const QuadratureRule& q) {
    const auto& pp = A.params();
    double acc = 0.0;
    for (std::size_t j = 0; j < q.theta.size(); ++j) {
        const double t = q.theta[j];
        const auto jv = v(1.0, t), ju = u(1.0, t);
        const auto M = A(1.0, t);
        const double conormal = M(0, 0) * ju.r + M(0, 1) * ju.t;
        const double tau = tau_of(A.profile().value(t), A.profile().slope(t), pp.k, pp.p);
        acc += q.wt[j] * jv.v * (conormal + tau * ju.t);
    }
    return acc;
}

struct CoercivityResult {
    bool pass = false;
    double c1 = 0.0;  ///< certified lower bound
    double c2 = 0.0;
    double c1_estimate = 0.0;
    std::vector<std::pair<double, double>> scan;  ///< (C2, Rayleigh estimate of λ_min)
};

namespace detail {

/// True when S is positive definite (all LDLᵀ pivots positive).
inline bool positive_definite(const SpMat& S) {
    Eigen::SimplicialLDLT<SpMat> ldlt(S);
    if (ldlt.info() != Eigen::Success) return false;
    return (ldlt.vectorD().array() > 0.0).all();
}

/// Smallest eigenvalue of the pencil (S, G), S positive definite, by inverse subspace iteration.
inline double pencil_min(const SpMat& S, const SpMat& G, unsigned seed, int block = 4, int iters = 60) {
    Eigen::SimplicialLDLT<SpMat> ldlt(S);
    const int n = int(S.rows());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    DenseMat X(n, block);
    for (int c = 0; c < block; ++c)
        for (int i = 0; i < n; ++i) X(i, c) = nd(rng);
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iters; ++it) {
        X = ldlt.solve(DenseMat(G * X));
        detail::orthonormalize(X);
        const DenseMat SX = S * X, GX = G * X;
        const DenseMat a = X.transpose() * SX, b = X.transpose() * GX;
        Eigen::GeneralizedSelfAdjointEigenSolver<DenseMat> es(0.5 * (a + a.transpose()), 0.5 * (b + b.transpose()));
        best = es.eigenvalues().minCoeff();
    }
    return best;
}

}  // namespace detail

/// Smallest generalized eigenvalue of (sym D + C2 G0, G1) over a scan of C2.
inline CoercivityResult coercivity_scan(const SpMat& D, const SpMat& G0, const SpMat& G1, const std::vector<double>& c2_scan,
                                        unsigned seed = 7u) {
    CoercivityResult out;
    const SpMat sym = 0.5 * (D + SpMat(D.transpose()));
    for (double c2 : c2_scan) {
        const SpMat S = sym + c2 * G0;
        if (!detail::positive_definite(S)) {
            out.scan.emplace_back(c2, -1.0);
            continue;
        }
        const double est = detail::pencil_min(S, G1, seed);
        out.scan.emplace_back(c2, est);
        // certify half the estimate through inertia
        if (est > 0.0 && detail::positive_definite(SpMat(S - 0.5 * est * G1))) {
            out.pass = true;
            out.c1 = 0.5 * est;
            out.c1_estimate = est;
            out.c2 = c2;
            break;
        }
    }
    return out;
}

struct WeightedGrams {
    SpMat g0;  ///< ∫ u φ r^{2β} dA
    SpMat g1;  ///< g0 + ∫ ∇°u·∇°φ r^{2α} dA
};

inline WeightedGrams weighted_grams(const StripGrid& g, const ProblemParams& pp) {
    WeightedGrams w;
    w.g0 = gram_mass(g, 2.0 * pp.beta + 2.0);
    w.g1 = w.g0 + gram_gradient(g, 2.0 * pp.alpha_space);
    return w;
}

inline CheckReport coercivity_check(const StripGrid& g, const CoefficientField& A, const std::vector<double>& c2_scan,
                                    AssemblyOptions opts = {}) {
    const SpMat D = assemble_dirichlet(g, A, opts);
    const auto W = weighted_grams(g, A.params());
    const auto res = coercivity_scan(D, W.g0, W.g1, c2_scan);
    CheckReport rep{"coercivity", res.pass, {}, {}};
    rep.metric("coercivity_c1", res.pass ? res.c1 : std::numeric_limits<double>::quiet_NaN())
        .metric("coercivity_c2", res.pass ? res.c2 : std::numeric_limits<double>::quiet_NaN())
        .metric("c1_estimate", res.c1_estimate);
    for (const auto& [c2, est] : res.scan) rep.metric("lambda_min_at_c2_" + std::to_string(int(c2)), est);
    if (!res.pass) rep.detail = "no C2 in the scan gives a positive definite pencil";
    return rep;
}

struct AdjointKernel {
    DenseMat basis;             ///< nodal values of F, columns
    std::vector<double> singular_values;
    std::vector<double> interior_residual, boundary_residual;
    int dimension() const { return int(basis.cols()); }
    /// F(1, θ_i) for each basis vector.
    DenseMat trace(const StripGrid& g) const { return basis.topRows(g.n_theta); }
};

/// Left near-kernel of the Dirichlet-form matrix: D(F, φ) = 0 for every trial φ.
inline AdjointKernel adjoint_kernel(const SpMat& L, const StripGrid& g, KernelOptions opt = {}) {
    const auto K = near_kernel(L, true, opt);
    AdjointKernel out;
    out.basis = K.basis;
    out.singular_values = K.singular_values;
    const Vec s = detail::diag_scaling(L);
    const SpMat At = SpMat((s.asDiagonal() * L * s.asDiagonal()).transpose());
    for (int c = 0; c < K.dimension(); ++c) {
        const Vec fh = s.cwiseInverse().asDiagonal() * K.basis.col(c);
        const Vec r = At * fh;
        double bi = 0.0, ii = 0.0;
        for (int i = 0; i < g.size(); ++i) (g.on_outer(i) ? bi : ii) += r[i] * r[i];
        out.interior_residual.push_back(std::sqrt(ii) / (K.sigma_max * fh.norm()));
        out.boundary_residual.push_back(std::sqrt(bi) / (K.sigma_max * fh.norm()));
    }
    return out;
}

/// ‖q - P q‖ / ‖q‖ with P the orthogonal projector onto span of the kernel traces.
inline double trace_distance(const DenseMat& traces, const Vec& q) {
    if (traces.cols() == 0) return 1.0;
    Eigen::ColPivHouseholderQR<DenseMat> qr(traces);
    const Vec coef = qr.solve(q);
    return (q - traces * coef).norm() / q.norm();
}

inline Vec boundary_q_on_grid(const StripGrid& g, const CoefficientField& A) {
    Vec q(g.n_theta);
    const auto& pp = A.params();
    for (int i = 0; i < g.n_theta; ++i)
        q[i] = q_of(A.profile().value(g.theta(i)), A.profile().slope(g.theta(i)), pp.k, pp.p);
    return q;
}

}  // namespace plap
