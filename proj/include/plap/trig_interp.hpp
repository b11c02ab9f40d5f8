#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace plap {

/// Real trigonometric interpolant of uniformly sampled periodic data.
///
/// Samples f_j = f(j T / n), j = 0..n-1, on a period T. The interpolant is
///   c_0 + sum_{m=1}^{n/2} (A_m cos(m w x) + B_m sin(m w x)),  w = 2 pi / T,
/// with the Nyquist term carrying half weight so that it reproduces the samples.
class TrigInterpolant {
public:
    TrigInterpolant() = default;

    TrigInterpolant(std::span<const double> samples, double period) : period_(period) {
        const std::size_t n = samples.size();
        if (n < 4 || n % 2 != 0) throw std::invalid_argument("TrigInterpolant: need an even sample count >= 4");
        const std::size_t half = n / 2;
        cos_.assign(half + 1, 0.0);
        sin_.assign(half + 1, 0.0);
        // Direct DFT with the twiddle table; O(n^2) once per profile.
        std::vector<double> ct(n), st(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * std::numbers::pi * double(j) / double(n);
            ct[j] = std::cos(ang);
            st[j] = std::sin(ang);
        }
        for (std::size_t m = 0; m <= half; ++m) {
            double sc = 0.0, ss = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t idx = (m * j) % n;
                sc += samples[j] * ct[idx];
                ss += samples[j] * st[idx];
            }
            cos_[m] = 2.0 * sc / double(n);
            sin_[m] = 2.0 * ss / double(n);
        }
        cos_[0] *= 0.5;
        cos_[half] *= 0.5;
        sin_[half] = 0.0;
    }

    double period() const { return period_; }
    std::size_t size() const { return 2 * (cos_.size() - 1); }

    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x) const { return eval(x, 1); }

    /// Magnitude of the highest retained harmonic; a resolution diagnostic.
    double tail_magnitude() const {
        const std::size_t h = cos_.size() - 1;
        return std::abs(cos_[h]) + std::abs(cos_[h - 1]) + std::abs(sin_[h - 1]);
    }

private:
    double eval(double x, int order) const {
        const double w = 2.0 * std::numbers::pi / period_;
        const std::complex<double> step = std::polar(1.0, w * x);
        std::complex<double> z = step;
        double acc = order == 0 ? cos_[0] : 0.0;
        for (std::size_t m = 1; m < cos_.size(); ++m) {
            if (m % 64 == 0) z = std::polar(1.0, w * x * double(m));  // curb drift of the power chain
            const double mw = double(m) * w;
            if (order == 0)
                acc += cos_[m] * z.real() + sin_[m] * z.imag();
            else
                acc += mw * (-cos_[m] * z.imag() + sin_[m] * z.real());
            z *= step;
        }
        return acc;
    }

    double period_ = 1.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

}  // namespace plap
