#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "plap/dual.hpp"
#include "plap/errors.hpp"
#include "plap/quasiradial.hpp"

namespace plap {

/// Symmetric 2x2 in the (e_r, e_θ) frame.
template <class T>
struct Sym2 {
    T rr, rt, tt;
};

/// Ã(a, a_θ): the bracketed matrix of the linearized operator.
template <class T>
Sym2<T> atilde(const T& a, const T& s, double k, double p) {
    const T ka = k * a;
    return {s * s + (p - 1.0) * ka * ka, (p - 2.0) * ka * s, ka * ka + (p - 1.0) * s * s};
}

/// (a_θ² + k²a²)^{(p-4)/2}
template <class T>
T omega(const T& a, const T& s, double k, double p) {
    using std::pow;
    return pow(s * s + k * k * a * a, 0.5 * (p - 4.0));
}

/// q = (a_θ²+k²a²)^{(4-p)/2} / (a_θ²+(p-1)k²a²)
template <class T>
T q_of(const T& a, const T& s, double k, double p) {
    using std::pow;
    const T g = s * s + k * k * a * a;
    return pow(g, 0.5 * (4.0 - p)) / (s * s + (p - 1.0) * k * k * a * a);
}

/// τ = -(a_θ²+k²a²)^{(p-4)/2} (p-2) k a a_θ
template <class T>
T tau_of(const T& a, const T& s, double k, double p) {
    return -omega(a, s, k, p) * ((p - 2.0) * k) * a * s;
}

/// Quintic smoothstep: 0 for r <= 1/2, 1 for r >= 1.
template <class T>
T cutoff(const T& r) {
    if (value_of(r) <= 0.5) return T(0.0);
    if (value_of(r) >= 1.0) return T(1.0);
    const T x = 2.0 * r - 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

/// A(r, θ) = r^{(p-2)(k-1)} ω Ã built from a quasiradial profile.
class CoefficientField {
public:
    explicit CoefficientField(AngularProfile profile)
        : profile_(std::make_shared<const AngularProfile>(std::move(profile))) {}
    explicit CoefficientField(std::shared_ptr<const AngularProfile> profile) : profile_(std::move(profile)) {}

    const AngularProfile& profile() const { return *profile_; }
    const ProblemParams& params() const { return profile_->params(); }

    double radial_weight(double r) const { return std::pow(r, 2.0 * params().alpha_space); }

    /// ω Ã at angle θ, without the radial weight.
    Sym2<double> angular(double theta) const {
        const double a = profile_->value(theta), s = profile_->slope(theta);
        const double k = params().k, p = params().p;
        auto m = atilde(a, s, k, p);
        const double w = omega(a, s, k, p);
        return {w * m.rr, w * m.rt, w * m.tt};
    }

    Sym2<Dual> angular_jet(double theta) const {
        const auto [a, s] = profile_->jet(theta);
        const double k = params().k, p = params().p;
        auto m = atilde(a, s, k, p);
        const Dual w = omega(a, s, k, p);
        return {w * m.rr, w * m.rt, w * m.tt};
    }

    Eigen::Matrix2d operator()(double r, double theta) const {
        if (!(r > 0.0)) throw DomainError("coeff_matrix: r must be positive");
        const auto m = angular(theta);
        const double w = radial_weight(r);
        Eigen::Matrix2d A;
        A << w * m.rr, w * m.rt, w * m.rt, w * m.tt;
        return A;
    }

private:
    std::shared_ptr<const AngularProfile> profile_;
};

inline Eigen::Matrix2d coeff_matrix(const CoefficientField& field, double r, double theta) { return field(r, theta); }

struct EigenPair {
    double mu_minus;
    double mu_plus;
    Eigen::Vector2d v_minus;
    Eigen::Vector2d v_plus;
};

/// Closed-form eigenstructure of A; the two candidate vectors are assigned by residual.
inline EigenPair eigen_pair(const CoefficientField& field, double r, double theta) {
    const Eigen::Matrix2d A = field(r, theta);
    const auto& pp = field.params();
    const double a = field.profile().value(theta), s = field.profile().slope(theta);
    const double g = s * s + pp.k * pp.k * a * a;
    const double scale = field.radial_weight(r) * omega(a, s, pp.k, pp.p) * g;
    const double lo = scale, hi = (pp.p - 1.0) * scale;
    Eigen::Vector2d u(-s, pp.k * a), w(pp.k * a, s);
    u.normalize();
    w.normalize();
    auto res = [&](const Eigen::Vector2d& v, double mu) { return (A * v - mu * v).norm(); };
    if (res(u, lo) + res(w, hi) <= res(w, lo) + res(u, hi)) return {lo, hi, u, w};
    return {lo, hi, w, u};
}

/// Samples of q and τ on the profile grid, plus Neumann data ψ once chosen.
struct BoundaryData {
    std::vector<double> theta_grid;
    std::vector<double> q;
    std::vector<double> tau;
    std::vector<double> psi;
    double M = 0.0;
};

inline BoundaryData boundary_q_tau(const ProblemParams& pp, const AngularProfile& prof) {
    BoundaryData bd;
    bd.theta_grid = prof.theta_grid();
    const std::size_t n = prof.size();
    bd.q.resize(n);
    bd.tau.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = prof.a()[j], s = prof.a_theta()[j];
        bd.q[j] = q_of(a, s, pp.k, pp.p);
        bd.tau[j] = tau_of(a, s, pp.k, pp.p);
    }
    return bd;
}

/// Trapezoid rule over [0, 2π) of samples given on one period [0, 2π/N).
inline double full_circle_integral(std::span<const double> f, int N) {
    const double h = 2.0 * std::numbers::pi / N / double(f.size());
    double acc = 0.0;
    for (double v : f) acc += v;
    return N * h * acc;
}

/// Rescales ψ so that its integral over the full circle equals M.
inline void set_psi(BoundaryData& bd, std::vector<double> psi, double M, int N) {
    if (psi.size() != bd.theta_grid.size()) throw DomainError("set_psi: size mismatch with theta grid");
    const double I = full_circle_integral(psi, N);
    if (std::abs(I) < 1e-300) throw DomainError("set_psi: psi has zero mean and cannot be normalized");
    for (double& v : psi) v *= M / I;
    bd.psi = std::move(psi);
    bd.M = M;
}

/// c(r, θ) = -τ(θ) η(r), the (2,1) entry of the skew part.
inline double skew_c(const CoefficientField& field, double r, double theta) {
    const auto& pp = field.params();
    const double a = field.profile().value(theta), s = field.profile().slope(theta);
    return -tau_of(a, s, pp.k, pp.p) * cutoff(r);
}

/// B = A + C with C = [[0, -c], [c, 0]].
inline Eigen::Matrix2d skew_field(const CoefficientField& field, double r, double theta) {
    Eigen::Matrix2d B = field(r, theta);
    const double c = skew_c(field, r, theta);
    B(0, 1) -= c;
    B(1, 0) += c;
    return B;
}

}  // namespace plap
