#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "plap/coefficients.hpp"

using namespace plap;
using std::numbers::pi;

namespace {

const CoefficientField& field43() {
    static const CoefficientField f(profile_ode(make_params(4.0, 3), 512, 1e-8));
    return f;
}

const CoefficientField& field63() {
    static const CoefficientField f(profile_ode(make_params(6.0, 3), 1024, 1e-8));
    return f;
}

}  // namespace

TEST(CoeffMatrix, DiagonalAtCrest) {
    const auto& F = field43();
    const double k = F.params().k, p = 4.0, r = 0.7;
    const auto A = F(r, 0.0);
    const double w = std::pow(r, (p - 2) * (k - 1)) * std::pow(k * k, (p - 4) / 2);
    EXPECT_NEAR(A(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(A(0, 0), w * (p - 1) * k * k, 1e-12 * A(0, 0));
    EXPECT_NEAR(A(1, 1), w * k * k, 1e-12 * A(1, 1));
}

TEST(CoeffMatrix, DeterminantAndSymmetryAndPeriod) {
    for (const auto* F : {&field43(), &field63()}) {
        const auto& pp = F->params();
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> ur(0.01, 1.0), ut(0.0, 2 * pi);
        for (int i = 0; i < 1000; ++i) {
            const double r = ur(rng), th = ut(rng);
            const auto A = F->operator()(r, th);
            const double a = F->profile().value(th), s = F->profile().slope(th);
            const double det = (pp.p - 1) * std::pow(r, 2 * (pp.p - 2) * (pp.k - 1)) *
                               std::pow(s * s + pp.k * pp.k * a * a, pp.p - 2);
            EXPECT_NEAR(A.determinant(), det, 1e-12 * det);
            EXPECT_EQ(A(0, 1), A(1, 0));
            const auto B = F->operator()(r, th + pp.period());
            EXPECT_NEAR((A - B).norm(), 0.0, 1e-9 * A.norm());
        }
    }
    EXPECT_THROW(coeff_matrix(field43(), 0.0, 0.1), DomainError);
}

TEST(CoeffMatrix, RayleighBounds) {
    const auto& F = field43();
    const auto& pp = F.params();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(0.01, 1.0), ut(0.0, 2 * pi), ux(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double r = ur(rng), th = ut(rng);
        const Eigen::Vector2d xi(ux(rng), ux(rng));
        const double a = F.profile().value(th), s = F.profile().slope(th);
        const double lo = std::pow(r, 2 * pp.alpha_space) * std::pow(s * s + pp.k * pp.k * a * a, (pp.p - 2) / 2) * xi.squaredNorm();
        const double quad = xi.dot(F(r, th) * xi);
        EXPECT_GE(quad, lo * (1 - 1e-10));
        EXPECT_LE(quad, (pp.p - 1) * lo * (1 + 1e-10));
    }
}

TEST(EigenPair, RatioAndResiduals) {
    for (const auto* F : {&field43(), &field63()}) {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ur(0.05, 1.0), ut(0.0, 2 * pi);
        for (int i = 0; i < 1000; ++i) {
            const double r = ur(rng), th = ut(rng);
            const auto A = F->operator()(r, th);
            const auto e = eigen_pair(*F, r, th);
            EXPECT_NEAR(e.mu_plus / e.mu_minus, F->params().p - 1, 1e-12);
            EXPECT_LT((A * e.v_plus - e.mu_plus * e.v_plus).norm(), 1e-12 * A.norm());
            EXPECT_LT((A * e.v_minus - e.mu_minus * e.v_minus).norm(), 1e-12 * A.norm());
        }
    }
}

TEST(EigenPair, AxesAtCrest) {
    const auto e = eigen_pair(field43(), 0.5, 0.0);
    EXPECT_NEAR(std::abs(e.v_plus(0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(e.v_minus(1)), 1.0, 1e-12);
}

TEST(Boundary, QAndTau) {
    const auto& F = field43();
    const auto& pp = F.params();
    const auto bd = boundary_q_tau(pp, F.profile());
    const std::size_t n = bd.q.size();
    EXPECT_NEAR(bd.q[0], std::pow(pp.k, 2 - pp.p) / (pp.p - 1), 1e-12);
    EXPECT_NEAR(bd.tau[0], 0.0, 1e-12);
    EXPECT_NEAR(bd.tau[n / 4], 0.0, 1e-10);  // a = 0 at π/2N
    for (std::size_t j = 0; j < n; ++j) {
        EXPECT_GT(bd.q[j], 0.0);
        EXPECT_NEAR(bd.q[j], bd.q[(n - j) % n], 1e-10);
        EXPECT_NEAR(bd.tau[j], -bd.tau[(n - j) % n], 1e-10);
    }
}

TEST(Boundary, PsiNormalization) {
    const auto& F = field43();
    auto bd = boundary_q_tau(F.params(), F.profile());
    std::vector<double> psi(bd.q.size());
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = 2.0 + std::cos(3.0 * bd.theta_grid[j]);
    set_psi(bd, psi, 1.5, 3);
    EXPECT_NEAR(full_circle_integral(bd.psi, 3), 1.5, 1e-10);
}

TEST(Skew, CutoffAndBoundaryValue) {
    const auto& F = field43();
    for (double th : {0.1, 0.4, 1.7}) {
        EXPECT_EQ((skew_field(F, 0.4, th) - F(0.4, th)).norm(), 0.0);
        const auto B = skew_field(F, 1.0, th);
        const auto A = F(1.0, th);
        const double a = F.profile().value(th), s = F.profile().slope(th);
        const double tau = tau_of(a, s, F.params().k, F.params().p);
        EXPECT_NEAR(B(1, 0) - A(1, 0), -tau, 1e-14);
        EXPECT_NEAR(B(0, 1) - A(0, 1), tau, 1e-14);
        const Eigen::Matrix2d C = B - A;
        EXPECT_NEAR((B - B.transpose() - 2 * C).norm(), 0.0, 1e-14);
        const Eigen::Vector2d xi(0.3, -1.1);
        EXPECT_NEAR(xi.dot(B * xi), xi.dot(A * xi), 1e-13);
    }
}

TEST(Skew, CutoffIsC2) {
    EXPECT_EQ(cutoff(0.5), 0.0);
    EXPECT_EQ(cutoff(1.0), 1.0);
    const Dual lo = cutoff(Dual(0.5 + 1e-9, 1.0)), hi = cutoff(Dual(1.0 - 1e-9, 1.0));
    EXPECT_NEAR(lo.d, 0.0, 1e-12);
    EXPECT_NEAR(hi.d, 0.0, 1e-12);
}
