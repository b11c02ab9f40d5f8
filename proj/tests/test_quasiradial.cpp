#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "plap/quasiradial.hpp"

using namespace plap;
using std::numbers::pi;

namespace {

// Independent root oracle: plain quadratic formula.
double quadratic_oracle(double p, int N, bool larger) {
    const double b = p / (p - 2.0);
    const double A = (2 * N - 1) * (b + 1), B = -2 * (N * N * b + 2 * N - 1), C = N * N * (1 + b);
    const double d = std::sqrt(std::max(0.0, B * B - 4 * A * C));
    return larger ? (-B + d) / (2 * A) : (-B - d) / (2 * A);
}

}  // namespace

TEST(Exponent, ClosedFormsAtP4) {
    EXPECT_NEAR(solve_exponent(4.0, 1), 1.0, 1e-12);
    EXPECT_NEAR(solve_exponent(4.0, 2), (11.0 + std::sqrt(13.0)) / 9.0, 1e-12);
    EXPECT_NEAR(solve_exponent(4.0, 3), (23.0 + std::sqrt(124.0)) / 15.0, 1e-12);
    EXPECT_NEAR(solve_exponent(4.0, 2), 1.6228390, 1e-7);
    EXPECT_NEAR(solve_exponent(4.0, 3), 2.2757019, 1e-7);
}

TEST(Exponent, MatchesQuadraticFormulaAndResidual) {
    for (double p : {2.5, 3.0, 4.0, 5.0, 7.5, 12.0})
        for (int N = 1; N <= 6; ++N)
            for (bool larger : {true, false}) {
                const double k = solve_exponent(p, N, larger ? RootBranch::larger : RootBranch::smaller);
                EXPECT_NEAR(k, quadratic_oracle(p, N, larger), 1e-10 * k);
                EXPECT_LT(exponent_residual(p, N, k), 1e-12);
            }
}

TEST(Exponent, LargerRootApproachesNMonotonically) {
    for (int N = 1; N <= 3; ++N) {
        double prev_gap = std::numeric_limits<double>::infinity();
        for (int m = 1; m <= 6; ++m) {
            const double p = 2.0 + std::pow(10.0, -m);
            const double gap = std::abs(N - solve_exponent(p, N));
            EXPECT_LE(gap, prev_gap + 1e-15);
            prev_gap = gap;
        }
        EXPECT_LT(prev_gap, 1e-5);
        // smaller root tends to N/(2N-1)
        EXPECT_NEAR(solve_exponent(2.0 + 1e-7, N, RootBranch::smaller), double(N) / (2 * N - 1), 1e-5);
    }
}

TEST(Exponent, RejectsBadInput) {
    EXPECT_THROW(solve_exponent(2.0, 3), DomainError);
    EXPECT_THROW(solve_exponent(1.5, 3), DomainError);
    EXPECT_THROW(solve_exponent(4.0, 0), DomainError);
}

TEST(Lambda, DirectSubstitution) {
    EXPECT_NEAR(lambda_param(4.0, 1.0), std::sqrt(1.0 / 3.0), 1e-15);
    EXPECT_NEAR(lambda_param(4.0, 2.2757018), 1.9135529, 1e-6);
    for (double p : {3.0, 4.0, 6.0})
        for (double k : {1.0, 1.7, 2.3, 5.0}) {
            const double lam = lambda_param(p, k);
            EXPECT_NEAR(lam * lam + 2 * k / (b_of(p) + 1), k * k, 1e-14 * k * k);
        }
    EXPECT_THROW(lambda_param(4.0, 0.5), ConstructionError);
}

TEST(Params, WindowAndStripExponent) {
    const auto pp = make_params(4.0, 3);
    EXPECT_DOUBLE_EQ(pp.b, 2.0);
    EXPECT_DOUBLE_EQ(pp.alpha_strip, pp.alpha_space + 1.0);
    EXPECT_TRUE(pp.beta_admissible(pp.beta));
    EXPECT_THROW(make_params(4.0, 3, RootBranch::larger, 5.0), DomainError);
}

TEST(Parametric, ValuesAndParity) {
    const auto pp = make_params(4.0, 2);
    std::vector<double> t = {-7.0, -1.3, -0.2, 0.0, 0.2, 1.3, 7.0};
    const auto pts = profile_parametric(pp, t);
    EXPECT_DOUBLE_EQ(pts[3].theta, 0.0);
    EXPECT_NEAR(pts[3].a_raw, std::pow(pp.lambda, pp.k - 1) * std::pow(pp.k, -pp.k), 1e-15);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(pts[i].theta, -pts[6 - i].theta, 1e-15);
        EXPECT_NEAR(pts[i].a_raw, pts[6 - i].a_raw, 1e-15);
    }
}

TEST(Parametric, DegenerateCaseIsCosine) {
    const auto pp = make_params(4.0, 1);
    std::vector<double> t;
    for (int i = -40; i <= 40; ++i) t.push_back(0.25 * i);
    for (const auto& pt : profile_parametric(pp, t)) {
        EXPECT_NEAR(pt.theta, std::atan(pt.t), 1e-14);
        EXPECT_NEAR(pt.a_raw, std::cos(pt.theta), 1e-14);
    }
}

TEST(ProfileOde, CosineAtP4N1) {
    const auto prof = profile_ode(make_params(4.0, 1), 512, 1e-8);
    double err = 0.0;
    for (std::size_t j = 0; j < prof.size(); ++j) err = std::max(err, std::abs(prof.a()[j] - std::cos(prof.theta_grid()[j])));
    EXPECT_LT(err, 1e-8);
    // off-node through the interpolant
    for (double th : {0.1, 1.234, 2.9, 5.5}) {
        EXPECT_NEAR(prof.value(th), std::cos(th), 1e-8);
        EXPECT_NEAR(prof.slope(th), -std::sin(th), 1e-8);
    }
}

TEST(ProfileOde, InvariantsAndPeriodicity) {
    for (double p : {3.0, 4.0, 6.0})
        for (int N : {2, 3}) {
            const std::size_t n = p > 5.0 ? 1024 : 512;
            const auto prof = profile_ode(make_params(p, N), n, 1e-8);
            const auto rep = check_profile(prof, 1e-8);
            EXPECT_TRUE(rep.pass) << "p=" << p << " N=" << N << " residual=" << rep.get("ode_residual")
                                  << " zero=" << rep.get("zero_at_quarter_period");
            for (double th : {0.05, 0.4, 1.0})
                EXPECT_NEAR(prof.value(th + prof.params().period()), prof.value(th), 1e-8);
        }
}

TEST(ProfileOde, AgreesWithNormalizedParametrization) {
    for (double p : {3.0, 4.0, 6.0})
        for (int N : {2, 3}) {
            const auto pp = make_params(p, N);
            const auto prof = profile_ode(pp, p > 5.0 ? 1024 : 512, 1e-8);
            std::vector<double> t;
            for (int i = -300; i <= 300; ++i) t.push_back(std::sinh(i / 30.0));
            double worst = 0.0;
            for (const auto& pt : profile_parametric(pp, t))
                worst = std::max(worst, std::abs(prof.value(pt.theta) - pt.a_raw / prof.norm_constant()));
            EXPECT_LT(worst, 1e-6) << "p=" << p << " N=" << N;
        }
}

TEST(ProfileOde, ResidualAt512Nodes) {
    for (double p : {3.0, 4.0})
        for (int N : {2, 3}) EXPECT_LT(profile_ode_residual(profile_ode(make_params(p, N), 512, 1.0)), 1e-8);
}

TEST(ProfileOde, RejectsSmallGrid) { EXPECT_THROW(profile_ode(make_params(4.0, 3), 32, 1e-8), DomainError); }

TEST(EvalF, HomogeneityAndAnchors) {
    const auto prof = profile_ode(make_params(4.0, 3), 256, 1e-6);
    EXPECT_EQ(eval_f(prof, 0.0, 1.0), 0.0);
    EXPECT_NEAR(eval_f(prof, 1.0, 0.0), 1.0, 1e-12);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 1.0), th(0.0, 2 * pi);
    for (int i = 0; i < 50; ++i) {
        const double r = u(rng), t = th(rng), s = 3.0 * u(rng);
        EXPECT_NEAR(eval_f(prof, s * r, t), std::pow(s, prof.params().k) * eval_f(prof, r, t), 1e-12);
    }
}

TEST(PLaplaceResidual, LinearFieldIsNoise) {
    PlanarField lin = [](double x, double) { return x; };
    const auto probes = annulus_probes(0.25, 0.9, 5, 12);
    std::vector<double> h = {0.02, 0.01};
    for (double p : {3.0, 4.0, 7.0})
        for (double r : p_laplace_residual(lin, p, h, probes)) EXPECT_LT(r, 1e-10);
}

TEST(PLaplaceResidual, RadialSquareHandCalculus) {
    PlanarField sq = [](double x, double y) { return x * x + y * y; };
    const std::array<double, 2> pt{0.3, 0.4};
    const double r = 0.5;
    for (double p : {3.0, 4.0}) {
        const double exact = std::pow(2.0, p - 1) * p * std::pow(r, p - 2);
        const double got = discrete_p_laplacian(sq, p, pt[0], pt[1], 1e-3);
        EXPECT_NEAR(got, exact, 1e-4 * exact);
    }
}

TEST(PLaplaceResidual, QuasiradialConvergesSecondOrder) {
    const auto prof = profile_ode(make_params(4.0, 3), 512, 1e-8);
    const auto probes = annulus_probes(0.25, 0.9, 6, 24);
    std::vector<double> h = {0.04, 0.02, 0.01, 0.005};
    const auto res = p_laplace_residual(quasiradial_field(prof), 4.0, h, probes);
    for (double o : observed_orders(res)) EXPECT_GE(o, 1.9);
}

TEST(PLaplaceResidual, RejectsOrigin) {
    PlanarField lin = [](double x, double) { return x; };
    std::vector<std::array<double, 2>> probes = {{0.0, 0.0}};
    std::vector<double> h = {0.1};
    EXPECT_THROW(p_laplace_residual(lin, 3.0, h, probes), DomainError);
}

TEST(BoundaryCurve, AgreesWithProfile) {
    const auto prof = profile_ode(make_params(4.0, 2), 512, 1e-8);
    std::vector<double> tau;
    for (int i = 0; i < 400; ++i) tau.push_back(2 * pi * i / 400.0);
    const auto chk = boundary_curve_check(prof, tau, 0.8);
    EXPECT_LT(chk.max_mismatch, 1e-6);
    EXPECT_NEAR(chk.scale, std::pow(2 * prof.params().k, -prof.params().k), 1e-10);
}

TEST(BoundaryCurve, SignFollowsCosNTau) {
    const auto prof = profile_ode(make_params(4.0, 2), 512, 1e-8);
    const double k = prof.params().k, lam = prof.params().lambda;
    for (int i = 1; i < 100; ++i) {
        const double tau = 2 * pi * (i + 0.5) / 100.0;
        const double x = (k + lam) * std::cos(tau) + (k - lam) * std::cos(3 * tau);
        const double y = (k + lam) * std::sin(tau) - (k - lam) * std::sin(3 * tau);
        const double model = prof.value(std::atan2(y, x));
        if (std::abs(std::cos(2 * tau)) < 1e-6) continue;
        EXPECT_EQ(model > 0, std::cos(2 * tau) > 0) << tau;
    }
}
