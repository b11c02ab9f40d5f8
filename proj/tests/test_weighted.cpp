#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "plap/weighted.hpp"

using namespace plap;
using std::numbers::pi;

namespace {

const CoefficientField& field43() {
    static const CoefficientField f(profile_ode(make_params(4.0, 3), 512, 1e-8));
    return f;
}

std::vector<PolarField> test_fields(int N) {
    using namespace fields;
    return {
        separable(power(1), cosine(N)),
        separable(power(2), sine(2 * N)),
        sum({{1.0, separable(exponential(1.0), cosine(2))}, {0.5, separable(power(1), sine(1))}}),
        sum({{1.0, separable(power(3), cosine(3))}, {-1.0, separable(power(5), cosine(3))}}),
        sum({{1.0, separable(power(2), unit())}, {0.3, separable(power(4), sine(N))}}),
    };
}

}  // namespace

TEST(Quadrature, SectorArea) {
    for (double span : {2 * pi, 2 * pi / 3}) {
        const auto q = make_quadrature(1e-6, 400, 64, span);
        const double area = integrate_disk(q, [](double, double) { return 1.0; });
        EXPECT_NEAR(area, 0.5 * span * (1 - 1e-12), 1e-10);
        for (double w : q.wr) EXPECT_GT(w, 0.0);
    }
}

TEST(WeightedNorms, ConstantAndHomogeneity) {
    const auto& pp = field43().params();
    const auto q = make_quadrature(1e-6, 2000, 32);
    const auto n1 = weighted_norms(fields::constant(1.0), pp, q);
    EXPECT_NEAR(n1.y0 * n1.y0, pi / (pp.beta + 1), 1e-8);
    EXPECT_NEAR(n1.y1, n1.y0, 1e-14);
    const auto f = test_fields(3)[2];
    const auto a = weighted_norms(f, pp, q);
    const auto b = weighted_norms([&](double r, double t) {
        auto j = f(r, t);
        j.v *= -2.5; j.r *= -2.5; j.t *= -2.5;
        return j;
    }, pp, q);
    EXPECT_NEAR(b.y0, 2.5 * a.y0, 1e-12 * a.y0);
    EXPECT_NEAR(b.y1, 2.5 * a.y1, 1e-12 * a.y1);
    EXPECT_GT(a.y1, a.y0);
}

TEST(WeightedNorms, RejectsBadBeta) {
    auto pp = field43().params();
    pp.beta = 2 * pp.alpha_space;
    EXPECT_THROW(weighted_norms(fields::constant(1.0), pp, make_quadrature(1e-6, 10, 8)), DomainError);
}

TEST(StripEnergy, ConstantIsZero) {
    const auto rep = strip_energy_check(fields::constant(3.0), field43(), make_quadrature(1e-6, 200, 32));
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.get("disk"), 0.0);
}

TEST(StripEnergy, DiskAndStripAgree) {
    const auto& A = field43();
    const auto q = make_quadrature(1e-6, 4000, 128);
    const double p = A.params().p;
    for (const auto& f : test_fields(3)) {
        const auto rep = strip_energy_check(f, A, q);
        EXPECT_TRUE(rep.pass) << rep.get("relative_difference");
        EXPECT_LT(rep.get("relative_difference"), 1e-6);
        const double ratio = rep.get("disk") / rep.get("isotropic_bracket");
        EXPECT_GE(ratio, 1.0 - 1e-9);
        EXPECT_LE(ratio, p - 1 + 1e-9);
    }
}

TEST(DirichletForm, SymmetricWithoutSkew) {
    const auto& A = field43();
    const auto q = make_quadrature(1e-6, 1000, 128);
    const auto f = test_fields(3);
    for (auto [i, j] : {std::pair{0, 3}, {2, 4}, {1, 4}}) {
        const double scale = std::sqrt(dirichlet_form(f[i], f[i], A, q, false) * dirichlet_form(f[j], f[j], A, q, false));
        const double duv = dirichlet_form(f[i], f[j], A, q, false), dvu = dirichlet_form(f[j], f[i], A, q, false);
        EXPECT_NEAR(duv, dvu, 1e-12 * scale) << i << "," << j;
    }
    const double s1 = dirichlet_form(f[2], f[4], A, q, true), s2 = dirichlet_form(f[4], f[2], A, q, true);
    EXPECT_GT(std::abs(s1 - s2), 1e-6 * std::abs(s1));
}

TEST(DirichletForm, GreenIdentity) {
    const auto& A = field43();
    const auto f = test_fields(3);
    for (auto [i, j] : {std::pair{0, 2}, {2, 3}, {4, 1}}) {
        std::vector<double> err;
        for (int n : {250, 500, 1000}) {
            const auto q = make_quadrature(1e-6, n, 128);
            const double lhs = dirichlet_form(f[i], f[j], A, q) - pairing_T(f[i], f[j], A, q);
            const double rhs = oblique_boundary_term(f[i], f[j], A, q);
            err.push_back(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
        EXPECT_LT(err.back(), 1e-8) << i << "," << j;
        EXPECT_LE(err.back(), err.front() * 1.01 + 1e-14);
    }
}

TEST(DirichletForm, ExpandedMatchesQuasiradialLinearization) {
    // the linearization applied to the quasiradial solution itself is (p-1) times its p-Laplacian
    const auto& A = field43();
    auto prof = std::make_shared<const AngularProfile>(A.profile());
    const auto f = fields::separable(fields::power(A.params().k), fields::profile(prof));
    for (double r : {0.3, 0.7})
        for (double t : {0.1, 0.5, 1.3}) {
            const double tv = apply_T(A, f(r, t), r, t);
            const double scale = std::abs(A.radial_weight(r)) * std::pow(r, A.params().k - 2);
            EXPECT_LT(std::abs(tv), 1e-6 * scale) << r << " " << t;
        }
}

TEST(Coercivity, FullFormPassesOnSmallGrid) {
    const auto& A = field43();
    const auto g = make_strip_grid(A.params(), 32, 64);
    const auto rep = coercivity_check(g, A, {1, 10, 100, 1000});
    EXPECT_TRUE(rep.pass) << rep.detail;
    EXPECT_GT(rep.get("coercivity_c1"), 0.0);
}

TEST(Coercivity, SymmetricPartHasConstantsInKernel) {
    const auto& A = field43();
    const auto g = make_strip_grid(A.params(), 32, 64);
    const SpMat D = assemble_dirichlet(g, A, {false});
    const auto W = weighted_grams(g, A.params());
    const Vec one = Vec::Ones(g.size());
    EXPECT_LT((D * one).norm(), 1e-12 * D.norm());
    const auto r0 = coercivity_scan(D, W.g0, W.g1, {0.0});
    EXPECT_FALSE(r0.pass);
    const auto r1 = coercivity_scan(D, W.g0, W.g1, {1.0});
    EXPECT_TRUE(r1.pass);
}

TEST(AdjointKernel, DimensionResidualsAndQDistance) {
    const auto& A = field43();
    int dims[2];
    for (int s = 0; s < 2; ++s) {
        const auto g = make_strip_grid(A.params(), 32 << s, 64 << s);
        const SpMat L = assemble_dirichlet(g, A);
        const auto E = adjoint_kernel(L, g);
        dims[s] = E.dimension();
        ASSERT_GE(E.dimension(), 1);
        for (int c = 0; c < E.dimension(); ++c) {
            EXPECT_LT(E.interior_residual[c], 1e-8);
            EXPECT_LT(E.boundary_residual[c], 1e-8);
        }
        EXPECT_GT(trace_distance(E.trace(g), boundary_q_on_grid(g, A)), 1e-3);
    }
    EXPECT_EQ(dims[0], dims[1]);
}

TEST(DiscreteForm, AdjointDifferenceVanishesAwayFromBoundary) {
    const auto& A = field43();
    const auto g = make_strip_grid(A.params(), 48, 64);
    const SpMat L = assemble_dirichlet(g, A);
    auto bump = [&](double ph) {
        return interpolate(g, [&](double t, double y) {
            const double ye = g.y_max - 0.5;
            const double s = (y - 0.3) * (ye - y);
            return (y > 0.3 && y < ye) ? s * s * std::cos(3 * t + ph) + 0.1 * s * s : 0.0;
        });
    };
    const Vec v = bump(0.2), u = bump(1.1);
    const double d1 = v.dot(L * u), d2 = u.dot(L * v);
    EXPECT_NEAR(d1, d2, 1e-10 * std::abs(d1));
}
