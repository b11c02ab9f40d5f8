#include <gtest/gtest.h>

#include <random>

#include "plap/algebra.hpp"

using namespace plap;

namespace {
using P = MultiPoly;
}

TEST(MultiPoly, BasicOps) {
    const P a = P::a(), s = P::s(), p = P::p();
    EXPECT_EQ((a + s).pow(2), a * a + 2 * a * s + s * s);
    EXPECT_TRUE(((a + s) - (a + s)).is_zero());
    EXPECT_EQ(((p - 2) * a).substitute(P::P, Rational(4)), 2 * a);
    EXPECT_EQ((a * a * s).diff(P::A), 2 * a * s);
    EXPECT_EQ((a + s).substitute(P::S, a * a), a + a * a);
    EXPECT_EQ((a * a - 1).str(), "a^2 - 1");
}

TEST(MultiPoly, NoStoredZerosAndGradedOrder) {
    P x = P::a() * P::s() + P::k();
    x -= P::k();
    EXPECT_EQ(x.size(), 1u);
    const P y = P::p() + P::a().pow(3) + P::s() * P::s();
    auto it = y.terms().begin();
    EXPECT_EQ(it->first, (P::Exponent{3, 0, 0, 0}));
}

TEST(Algebra, DetIdentityExact) {
    const auto rep = verify_det_identity();
    EXPECT_TRUE(rep.pass) << rep.detail;
    EXPECT_EQ(rep.get("surviving_terms"), 0.0);
    SymbolicForms f;
    const std::array<Rational, 4> pt{2, 3, 5, 7};
    EXPECT_EQ((f.t11 * f.t22 - f.t12 * f.t12).evaluate(pt), Rational(6) * Rational(9 + 100) * Rational(9 + 100));
}

TEST(Algebra, SignChainExact) {
    const auto rep = verify_sign_chain();
    EXPECT_TRUE(rep.pass) << rep.detail;
    for (const auto& id : sign_chain_identities()) EXPECT_TRUE(id.remainder().is_zero()) << id.name << ": " << id.remainder().str();
    for (const auto& id : p4_identities()) EXPECT_TRUE(id.remainder().is_zero()) << id.name << ": " << id.remainder().str();
}

TEST(Algebra, TamperedIdentityIsCaught) {
    auto ids = sign_chain_identities();
    ids[0].rhs += P::k();
    const auto rep = check_identities("tampered", ids, {1, 1, 3, 5});
    EXPECT_FALSE(rep.pass);
    EXPECT_NE(rep.detail.find("coef_1"), std::string::npos);
}

TEST(Algebra, RandomRationalPoints) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> num(-40, 40), den(1, 9);
    auto ids = sign_chain_identities();
    for (auto& id : det_identities()) ids.push_back(id);
    for (const auto& id : ids)
        for (int t = 0; t < 100; ++t) {
            std::array<Rational, 4> x;
            for (auto& v : x) v = Rational(num(rng), den(rng));
            EXPECT_EQ(id.lhs.evaluate(x), id.rhs.evaluate(x)) << id.name;
        }
}

TEST(CriticalExponents, Values) {
    EXPECT_NEAR(critical_exponents(2.0).p2, (5 + std::sqrt(17.0)) / 2, 1e-12);
    for (double k : {1.1, 1.5, 2.0, 5.0, 50.0}) {
        const auto c = critical_exponents(k);
        EXPECT_LT(c.p1, 1.0);
        EXPECT_LT(c.p1, c.p2);
        EXPECT_NEAR(c.p1 + c.p2, 5.0, 1e-12);
        EXPECT_NEAR(c.p1 * c.p2 * (k - 1), 4 * k - 6, 1e-9 * k);
        if (k >= 2) {
            EXPECT_GT(c.p2, 4.0);
        }
    }
    EXPECT_THROW(critical_exponents(1.0), DomainError);
}

TEST(TauqSign, PositiveAtMinima) {
    for (double p : {4.0, 5.0, 6.0}) {
        const auto pp = make_params(p, 3);
        ASSERT_GE(pp.k, 2.0);
        ASSERT_LT(make_params(p, 2).k, 2.0);
        const auto prof = profile_ode(pp, p > 4 ? 1024 : 512, 1e-8);
        const auto rep = verify_tauq_sign(pp, prof);
        EXPECT_TRUE(rep.pass) << "p=" << p << " " << rep.detail;
        EXPECT_GE(rep.get("local_minima"), 1.0);
    }
}

TEST(TauqSign, RejectsSmallK) {
    const auto pp = make_params(4.0, 2);
    EXPECT_THROW(verify_tauq_sign(pp, profile_ode(pp, 256, 1e-6)), DomainError);
}

TEST(TauqSign, AnalyticMatchesFiniteDifferences) {
    const auto pp = make_params(4.0, 3);
    const auto prof = profile_ode(pp, 512, 1e-8);
    auto tq = [&](double th) { return detail::tauq_jet(prof, th).v; };
    auto q = [&](double th) { return detail::q_jet(prof, th).v; };
    std::vector<double> eq, et;
    for (double h : {0.02, 0.01, 0.005}) {
        double wq = 0, wt = 0;
        for (double th : {0.1, 0.3, 0.45, 0.8, 1.9}) {
            wq = std::max(wq, std::abs((q(th + h) - q(th - h)) / (2 * h) - detail::q_jet(prof, th).d));
            wt = std::max(wt, std::abs((tq(th + h) - tq(th - h)) / (2 * h) - detail::tauq_jet(prof, th).d));
        }
        eq.push_back(wq);
        et.push_back(wt);
    }
    for (std::size_t i = 1; i < eq.size(); ++i) {
        EXPECT_GE(std::log2(eq[i - 1] / eq[i]), 1.9);
        EXPECT_GE(std::log2(et[i - 1] / et[i]), 1.9);
    }
}
