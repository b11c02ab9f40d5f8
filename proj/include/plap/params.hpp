#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "plap/errors.hpp"

namespace plap {

enum class RootBranch { larger, smaller };

inline const char* to_string(RootBranch b) { return b == RootBranch::larger ? "larger" : "smaller"; }

/// Ratio p/(p-2) that appears throughout the exponent algebra.
inline double b_of(double p) { return p / (p - 2.0); }

/// Radial exponent k(p, N): a root of
///   (2N-1)(b+1) k^2 - 2(N^2 b + 2N - 1) k + N^2 (1+b) = 0,   b = p/(p-2).
inline double solve_exponent(double p, int N, RootBranch branch = RootBranch::larger) {
    if (!(p > 2.0)) throw DomainError("solve_exponent: p must be > 2");
    if (N < 1) throw DomainError("solve_exponent: N must be >= 1");
    const double b = b_of(p);
    const double qa = (2.0 * N - 1.0) * (b + 1.0);
    const double qb = -2.0 * (double(N) * N * b + 2.0 * N - 1.0);
    const double qc = double(N) * N * (1.0 + b);
    double disc = qb * qb - 4.0 * qa * qc;
    // N = 1 is a double root; clamp rounding noise.
    if (disc < 0.0 && disc > -1e-12 * qb * qb) disc = 0.0;
    if (disc < 0.0) {
        std::ostringstream os;
        os << "solve_exponent: negative discriminant " << disc << " for p=" << p << ", N=" << N;
        throw ConstructionError(os.str());
    }
    const double sq = std::sqrt(disc);
    // Cancellation-free pair of roots.
    const double t = -0.5 * (qb - sq);  // qb < 0, so t = (-qb + sq)/2 > 0
    const double r_big = t / qa;
    const double r_small = qc / t;
    return branch == RootBranch::larger ? std::max(r_big, r_small) : std::min(r_big, r_small);
}

/// Residual of the exponent quadratic, scaled by its coefficient magnitudes.
inline double exponent_residual(double p, int N, double k) {
    const double b = b_of(p);
    const double qa = (2.0 * N - 1.0) * (b + 1.0);
    const double qb = -2.0 * (double(N) * N * b + 2.0 * N - 1.0);
    const double qc = double(N) * N * (1.0 + b);
    const double scale = std::abs(qa) * k * k + std::abs(qb) * k + std::abs(qc);
    return std::abs(qa * k * k + qb * k + qc) / scale;
}

/// lambda = sqrt(k^2 - 2k/(b+1)).
inline double lambda_param(double p, double k) {
    const double rad = k * k - 2.0 * k / (b_of(p) + 1.0);
    if (rad < 0.0) {
        std::ostringstream os;
        os << "lambda_param: negative radicand " << rad << " (p=" << p << ", k=" << k << ")";
        throw ConstructionError(os.str());
    }
    return std::sqrt(rad);
}

/// All scalar parameters of the construction for one (p, N).
struct ProblemParams {
    double p = 4.0;
    int N = 1;
    double k = 1.0;
    double b = 2.0;
    double lambda = 0.0;
    double alpha_space = 0.0;  ///< (p-2)(k-1)/2, weight exponent of |∇°v|^2 in the disk
    double beta = -1.0;        ///< weight exponent of |v|^2 in Y0
    double alpha_strip = 1.0;  ///< alpha_space + 1
    RootBranch branch = RootBranch::larger;

    double period() const { return 2.0 * std::numbers::pi / N; }

    /// Open window alpha-1 < beta < 2 alpha - 1; empty unless k > 1.
    bool beta_admissible(double bt) const { return alpha_space - 1.0 < bt && bt < 2.0 * alpha_space - 1.0; }
    bool has_beta_window() const { return k > 1.0; }

    /// y = -ln r cut at which the strip weight e^{-2 alpha_strip y} drops below 1e-12.
    double default_y_max() const { return std::ceil(std::log(1e12) / (2.0 * alpha_strip)); }
};

inline double default_beta(double alpha_space) { return (3.0 * alpha_space - 2.0) / 2.0; }

inline ProblemParams make_params(double p, int N, RootBranch branch = RootBranch::larger,
                                 std::optional<double> beta = std::nullopt) {
    ProblemParams pp;
    pp.p = p;
    pp.N = N;
    pp.branch = branch;
    pp.k = solve_exponent(p, N, branch);
    pp.b = b_of(p);
    pp.lambda = lambda_param(p, pp.k);
    pp.alpha_space = (p - 2.0) * (pp.k - 1.0) / 2.0;
    pp.alpha_strip = pp.alpha_space + 1.0;
    pp.beta = beta.value_or(default_beta(pp.alpha_space));
    if (beta && pp.has_beta_window() && !pp.beta_admissible(*beta)) {
        std::ostringstream os;
        os << "make_params: beta=" << *beta << " outside (" << pp.alpha_space - 1.0 << ", "
           << 2.0 * pp.alpha_space - 1.0 << ")";
        throw DomainError(os.str());
    }
    return pp;
}

}  // namespace plap
