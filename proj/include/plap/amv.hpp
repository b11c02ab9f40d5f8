#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "plap/errors.hpp"
#include "plap/quasiradial.hpp"
#include "plap/report.hpp"

namespace plap {

inline double amv_alpha(double p) { return 4.0 / (p + 2.0); }

/// Annulus inner <= |x| <= outer that the balls must stay inside.
struct AmvDomain {
    double inner = 0.0;
    double outer = 1.0;
};

struct AmvSample {
    double radius, ball_mean, midrange, remainder;
};

namespace detail {

inline double ball_mean(const PlanarField& f, double x0, double y0, double rho, int n_theta = 256) {
    using Gauss = boost::math::quadrature::gauss<double, 20>;
    double acc = 0.0;
    for (int j = 0; j < n_theta; ++j) {
        const double t = 2.0 * std::numbers::pi * (j + 0.5) / n_theta, c = std::cos(t), s = std::sin(t);
        acc += Gauss::integrate([&](double r) { return r * f(x0 + r * c, y0 + r * s); }, 0.0, rho);
    }
    return acc * (2.0 * std::numbers::pi / n_theta) / (std::numbers::pi * rho * rho);
}

/// Max and min over the closed ball: dense polar sampling, the extreme samples refined along the circle
/// through them with Brent's method.
inline std::pair<double, double> ball_extrema(const PlanarField& f, double x0, double y0, double rho,
                                              int n_theta = 512, int n_r = 16) {
    double best[2] = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double arg[2][2] = {};
    for (int i = 0; i <= n_r; ++i) {
        const double r = rho * i / n_r;
        for (int j = 0; j < (i == 0 ? 1 : n_theta); ++j) {
            const double t = 2.0 * std::numbers::pi * j / n_theta;
            const double v = f(x0 + r * std::cos(t), y0 + r * std::sin(t));
            if (v > best[0]) best[0] = v, arg[0][0] = r, arg[0][1] = t;
            if (v < best[1]) best[1] = v, arg[1][0] = r, arg[1][1] = t;
        }
    }
    const double dt = 2.0 * std::numbers::pi / n_theta;
    for (int s = 0; s < 2; ++s) {
        const double sign = s == 0 ? -1.0 : 1.0, r = arg[s][0];
        if (r == 0.0) continue;
        auto g = [&](double t) { return sign * f(x0 + r * std::cos(t), y0 + r * std::sin(t)); };
        const double v = boost::math::tools::brent_find_minima(g, arg[s][1] - dt, arg[s][1] + dt, 50).second;
        best[s] = s == 0 ? std::max(best[0], -v) : std::min(best[1], v);
    }
    return {best[0], best[1]};
}

}  // namespace detail

/// u(x₀) - [α ball-mean + (1-α) midrange] over the radii, with the fitted power of the remainder.
/// o(r²) is accepted when the fitted power exceeds min_exponent; a generic smooth field sits at 2.
inline CheckReport amv_probe(const PlanarField& f, double p, std::array<double, 2> x0, const std::vector<double>& radii,
                             AmvDomain dom = {}, double min_exponent = 2.5, double noise = 1e-13) {
    const double d = std::hypot(x0[0], x0[1]);
    for (double rho : radii)
        if (!(rho > 0.0) || d + rho > dom.outer || d - rho < dom.inner) {
            std::ostringstream os;
            os << "amv_probe: ball of radius " << rho << " leaves the domain";
            throw DomainError(os.str());
        }
    const double alpha = amv_alpha(p), u0 = f(x0[0], x0[1]);
    std::vector<AmvSample> samples;
    double scale = std::abs(u0);
    for (double rho : radii) {
        const double mean = detail::ball_mean(f, x0[0], x0[1], rho);
        const auto [mx, mn] = detail::ball_extrema(f, x0[0], x0[1], rho);
        const double mid = 0.5 * (mx + mn);
        samples.push_back({rho, mean, mid, u0 - (alpha * mean + (1.0 - alpha) * mid)});
        scale = std::max({scale, std::abs(mx), std::abs(mn)});
    }
    // log-log least squares on the samples above the noise floor
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    double max_rem = 0.0;
    for (const auto& s : samples) {
        max_rem = std::max(max_rem, std::abs(s.remainder));
        if (std::abs(s.remainder) <= noise * scale) continue;
        const double lx = std::log(s.radius), ly = std::log(std::abs(s.remainder));
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
    }
    CheckReport rep{"amv_probe", false, {}, {}};
    rep.metric("alpha", alpha).metric("max_abs_remainder", max_rem);
    for (std::size_t i = 0; i < samples.size(); ++i)
        rep.metric("remainder_" + std::to_string(i), samples[i].remainder);
    if (n < 2) {
        rep.metric("exponent", std::numeric_limits<double>::infinity());
        rep.pass = true;
        rep.detail = "remainder at noise level";
        return rep;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.metric("exponent", slope);
    rep.pass = slope > min_exponent;
    return rep;
}

}  // namespace plap
