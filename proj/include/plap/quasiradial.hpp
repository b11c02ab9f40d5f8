#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "plap/dual.hpp"
#include "plap/errors.hpp"
#include "plap/params.hpp"
#include "plap/report.hpp"
#include "plap/trig_interp.hpp"

namespace plap {

/// Numerator and denominator of the separation potential V(a, a_θ).
template <class T>
struct Potential {
    T num;
    T den;
};

template <class T>
Potential<T> potential_parts(const T& a, const T& s, double k, double p) {
    const double beta = (2.0 * p - 3.0) * k * k - (p - 2.0) * k;
    const double gamma = (p - 1.0) * k * k - (p - 2.0) * k;
    return {beta * s * s + gamma * k * k * a * a, (p - 1.0) * s * s + k * k * a * a};
}

/// V(a, a_θ) of the profile equation a_θθ + V a = 0.
template <class T>
T potential(const T& a, const T& s, double k, double p) {
    const auto parts = potential_parts(a, s, k, p);
    return parts.num / parts.den;
}

/// Sampled angular profile on one period [0, 2π/N) plus its periodic interpolants.
class AngularProfile {
public:
    AngularProfile() = default;

    AngularProfile(ProblemParams params, std::vector<double> a, std::vector<double> a_theta, double norm_constant)
        : params_(params), a_(std::move(a)), a_theta_(std::move(a_theta)), norm_constant_(norm_constant) {
        const std::size_t n = a_.size();
        theta_.resize(n);
        for (std::size_t j = 0; j < n; ++j) theta_[j] = params_.period() * double(j) / double(n);
        interp_a_ = TrigInterpolant(a_, params_.period());
        interp_s_ = TrigInterpolant(a_theta_, params_.period());
    }

    const ProblemParams& params() const { return params_; }
    int N() const { return params_.N; }
    std::size_t size() const { return a_.size(); }
    double spacing() const { return params_.period() / double(a_.size()); }
    const std::vector<double>& theta_grid() const { return theta_; }
    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& a_theta() const { return a_theta_; }
    double norm_constant() const { return norm_constant_; }

    double value(double theta) const { return interp_a_(theta); }
    double slope(double theta) const { return interp_s_(theta); }
    /// a_θθ from the profile equation itself.
    double curvature(double theta) const {
        const double a = value(theta), s = slope(theta);
        return -potential(a, s, params_.k, params_.p) * a;
    }

    /// (a, a_θ) as a dual pair whose derivative part is d/dθ.
    std::array<Dual, 2> jet(double theta) const {
        const double a = value(theta), s = slope(theta);
        const double ss = -potential(a, s, params_.k, params_.p) * a;
        return {Dual(a, s), Dual(s, ss)};
    }

private:
    ProblemParams params_;
    std::vector<double> theta_;
    std::vector<double> a_;
    std::vector<double> a_theta_;
    double norm_constant_ = 1.0;
    TrigInterpolant interp_a_;
    TrigInterpolant interp_s_;
};

/// One point (θ(t), a_raw(t)) of the arctan parametrization.
struct ParametricPoint {
    double t;
    double theta;
    double a_raw;
};

/// Unnormalized parametrization of the profile on (-π/2N, π/2N):
///   a = (t²+λ²)^{(k-1)/2} (t²+k²)^{-k/2},   θ = atan(t/k) - ((k-1)/λ) atan(t/λ).
inline std::vector<ParametricPoint> profile_parametric(const ProblemParams& pp, std::span<const double> t_grid) {
    if (!(pp.lambda > 0.0)) throw ConstructionError("profile_parametric: lambda must be positive");
    const double k = pp.k, lam = pp.lambda;
    std::vector<ParametricPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        const double a = std::pow(t * t + lam * lam, 0.5 * (k - 1.0)) * std::pow(t * t + k * k, -0.5 * k);
        const double th = std::atan(t / k) - (k - 1.0) / lam * std::atan(t / lam);
        out.push_back({t, th, a});
    }
    return out;
}

/// a_raw(0) = λ^{k-1} k^{-k}: the scalar linking the parametrization to a(0) = 1.
inline double parametric_norm_constant(const ProblemParams& pp) {
    return std::pow(pp.lambda, pp.k - 1.0) * std::pow(pp.k, -pp.k);
}

/// Periodic 8th-order centered first derivative of uniformly spaced samples.
inline std::vector<double> periodic_derivative8(std::span<const double> f, double h) {
    static constexpr std::array<double, 4> c = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const std::ptrdiff_t n = std::ptrdiff_t(f.size());
    std::vector<double> d(f.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t m = 1; m <= 4; ++m) acc += c[m - 1] * (f[(i + m) % n] - f[(i - m + n * 4) % n]);
        d[i] = acc / h;
    }
    return d;
}

/// Max-norm residual of a_θθ + V(a, a_θ) a at the nodes, a_θθ by centered differences of a_θ.
inline double profile_ode_residual(const AngularProfile& prof) {
    const auto s_prime = periodic_derivative8(prof.a_theta(), prof.spacing());
    const auto& a = prof.a();
    const auto& s = prof.a_theta();
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double r = s_prime[j] + potential(a[j], s[j], prof.params().k, prof.params().p) * a[j];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

struct ProfileOdeOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
};

/// Integrates the profile equation from a(0) = 1, a_θ(0) = 0 over [0, π/N] and extends the
/// samples to [0, 2π/N) with a(-θ) = a(θ) and periodicity.
inline AngularProfile profile_ode(const ProblemParams& pp, std::size_t n_nodes, double tol,
                                  ProfileOdeOptions opts = {}) {
    namespace odeint = boost::numeric::odeint;
    if (n_nodes < 64 || n_nodes % 4 != 0)
        throw DomainError("profile_ode: n_nodes must be >= 64 and divisible by 4");
    using State = std::array<double, 2>;
    const double k = pp.k, p = pp.p;
    double failing_theta = std::numeric_limits<double>::quiet_NaN();
    auto rhs = [&](const State& x, State& dxdt, double th) {
        const auto parts = potential_parts(x[0], x[1], k, p);
        if (!(parts.den > 1e-300)) {
            failing_theta = th;
            throw ConstructionError("profile_ode: denominator collapse");
        }
        dxdt[0] = x[1];
        dxdt[1] = -parts.num / parts.den * x[0];
    };

    const std::size_t half = n_nodes / 2;
    const double h = pp.period() / double(n_nodes);
    std::vector<double> times(half + 1);
    for (std::size_t j = 0; j <= half; ++j) times[j] = h * double(j);
    times[half] = pp.period() / 2.0;

    std::vector<double> a(n_nodes), s(n_nodes);
    State x{1.0, 0.0};
    std::size_t idx = 0;
    try {
        auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
        odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), h / 4.0,
                                [&](const State& st, double) {
                                    a[idx] = st[0];
                                    s[idx] = st[1];
                                    ++idx;
                                });
    } catch (const ConstructionError& e) {
        std::ostringstream os;
        os << e.what() << " at theta=" << failing_theta;
        throw ConstructionError(os.str());
    }
    if (idx != half + 1) throw ConstructionError("profile_ode: integrator stopped early");
    for (std::size_t j = half + 1; j < n_nodes; ++j) {
        a[j] = a[n_nodes - j];
        s[j] = -s[n_nodes - j];
    }
    s[0] = 0.0;
    s[half] = 0.0;

    for (std::size_t j = 0; j < n_nodes; ++j) {
        if (!((p - 1.0) * s[j] * s[j] + k * k * a[j] * a[j] > 0.0)) {
            std::ostringstream os;
            os << "profile_ode: degenerate node at theta=" << h * double(j);
            throw ConstructionError(os.str());
        }
    }

    const double norm = pp.lambda > 0.0 ? parametric_norm_constant(pp) : 1.0;
    AngularProfile prof(pp, std::move(a), std::move(s), norm);
    const double res = profile_ode_residual(prof);
    if (!(res < tol)) {
        std::ostringstream os;
        os << "profile_ode: ODE residual " << res << " exceeds tolerance " << tol;
        throw ConstructionError(os.str());
    }
    return prof;
}

/// Nodewise check of the AngularProfile invariants.
inline CheckReport check_profile(const AngularProfile& prof, double tol) {
    const auto& a = prof.a();
    const auto& s = prof.a_theta();
    const std::size_t n = a.size();
    double odd = 0.0, even = 0.0, denmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t refl = (n - j) % n;          // -θ
        const std::size_t anti = (n / 2 + n - j) % n;  // π/N - θ
        even = std::max(even, std::abs(a[j] - a[refl]));
        odd = std::max(odd, std::abs(a[j] + a[anti]));
        const double k = prof.params().k, p = prof.params().p;
        denmin = std::min(denmin, (p - 1.0) * s[j] * s[j] + k * k * a[j] * a[j]);
    }
    const double res = profile_ode_residual(prof);
    const double zero = std::abs(prof.value(std::numbers::pi / (2.0 * prof.N())));
    CheckReport r;
    r.name = "profile_invariants";
    r.metric("a0_error", std::abs(a[0] - 1.0))
        .metric("a_theta0", std::abs(s[0]))
        .metric("ode_residual", res)
        .metric("even_symmetry", even)
        .metric("odd_symmetry", odd)
        .metric("zero_at_quarter_period", zero)
        .metric("min_denominator", denmin);
    r.pass = std::abs(a[0] - 1.0) < 1e-12 && std::abs(s[0]) < 1e-12 && res < tol && even < tol && odd < tol &&
             zero < tol && denmin > 0.0;
    return r;
}

/// f = r^k a(θ).
inline double eval_f(const AngularProfile& prof, double r, double theta) {
    if (r == 0.0) return 0.0;
    return std::pow(r, prof.params().k) * prof.value(theta);
}

using PlanarField = std::function<double(double, double)>;

/// Cartesian evaluator for r^k a(θ).
inline PlanarField quasiradial_field(const AngularProfile& prof) {
    return [&prof](double x, double y) { return eval_f(prof, std::hypot(x, y), std::atan2(y, x)); };
}

/// Probe points on a polar lattice inside r_min <= r <= r_max.
inline std::vector<std::array<double, 2>> annulus_probes(double r_min, double r_max, int n_r, int n_theta) {
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < n_r; ++i) {
        const double r = n_r == 1 ? r_min : r_min + (r_max - r_min) * double(i) / double(n_r - 1);
        for (int j = 0; j < n_theta; ++j) {
            const double th = 2.0 * std::numbers::pi * (double(j) + 0.37) / double(n_theta);
            pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }
    return pts;
}

/// Discrete div(|∇f|^{p-2} ∇f) at one point: fluxes on the four half-step faces,
/// face gradients by centered differences of spacing h.
inline double discrete_p_laplacian(const PlanarField& f, double p, double x, double y, double h) {
    const double hh = 0.5 * h;
    auto flux = [&](double gx, double gy, int comp) {
        const double mag2 = gx * gx + gy * gy;
        const double w = mag2 > 0.0 ? std::pow(mag2, 0.5 * (p - 2.0)) : 0.0;
        return w * (comp == 0 ? gx : gy);
    };
    auto fx_at = [&](double xc) {  // x-flux on the face through (xc, y)
        const double gx = (f(xc + hh, y) - f(xc - hh, y)) / h;
        const double gy = (f(xc, y + hh) - f(xc, y - hh)) / h;
        return flux(gx, gy, 0);
    };
    auto fy_at = [&](double yc) {
        const double gx = (f(x + hh, yc) - f(x - hh, yc)) / h;
        const double gy = (f(x, yc + hh) - f(x, yc - hh)) / h;
        return flux(gx, gy, 1);
    };
    return (fx_at(x + hh) - fx_at(x - hh)) / h + (fy_at(y + hh) - fy_at(y - hh)) / h;
}

/// Max-norm discrete p-Laplace residual over the probe points, one value per spacing.
inline std::vector<double> p_laplace_residual(const PlanarField& f, double p, std::span<const double> spacings,
                                              std::span<const std::array<double, 2>> probes) {
    std::vector<double> out;
    for (double h : spacings) {
        double worst = 0.0;
        for (const auto& pt : probes) {
            if (std::hypot(pt[0], pt[1]) <= h) throw DomainError("p_laplace_residual: probe stencil touches the origin");
            worst = std::max(worst, std::abs(discrete_p_laplacian(f, p, pt[0], pt[1], h)));
        }
        out.push_back(worst);
    }
    return out;
}

/// log2 ratios of successive entries; the observed order of a halving study.
inline std::vector<double> observed_orders(std::span<const double> errors) {
    std::vector<double> o;
    for (std::size_t i = 1; i < errors.size(); ++i) o.push_back(std::log2(errors[i - 1] / errors[i]));
    return o;
}

struct CurveCheck {
    double max_mismatch = 0.0;
    double scale = 0.0;  ///< f / (r^k a(θ)) fixed at τ = 0
    std::size_t points = 0;
};

/// Compares the (τ, h) parametrization of f against scale · r^k a(θ) along a τ sweep.
inline CurveCheck boundary_curve_check(const AngularProfile& prof, std::span<const double> tau_grid, double h) {
    if (!(h > 0.0)) throw DomainError("boundary_curve_check: h must be positive");
    const auto& pp = prof.params();
    const double k = pp.k, lam = pp.lambda;
    const int m = 2 * pp.N - 1;
    auto point = [&](double tau) {
        const double hm = std::pow(h, double(m));
        const double x = hm * ((k + lam) * std::cos(tau) + (k - lam) * std::cos(m * tau));
        const double y = hm * ((k + lam) * std::sin(tau) - (k - lam) * std::sin(m * tau));
        const double f = std::pow(h, k * m) * std::cos(pp.N * tau);
        return std::array<double, 3>{x, y, f};
    };
    const auto p0 = point(0.0);
    CurveCheck out;
    out.scale = p0[2] / (std::pow(std::hypot(p0[0], p0[1]), k) * prof.value(0.0));
    for (double tau : tau_grid) {
        const auto [x, y, f] = point(tau);
        const double r = std::hypot(x, y);
        if (r < 1e-300) continue;
        const double rk = std::pow(r, k);
        const double model = out.scale * rk * prof.value(std::atan2(y, x));
        out.max_mismatch = std::max(out.max_mismatch, std::abs(f - model) / (out.scale * rk));
        ++out.points;
    }
    return out;
}

}  // namespace plap
