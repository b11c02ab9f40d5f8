#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "plap/coefficients.hpp"
#include "plap/multipoly.hpp"
#include "plap/report.hpp"

namespace plap {

/// The building blocks of the sign argument as exact polynomials in (a, s, k, p).
struct SymbolicForms {
    MultiPoly a = MultiPoly::a(), s = MultiPoly::s(), k = MultiPoly::k(), p = MultiPoly::p();
    MultiPoly beta, gamma;
    MultiPoly v_num, v_den;  // V = v_num / v_den
    MultiPoly big_a, big_b;  // A = s² + k²a²,  B = s² + (p-1)k²a²
    MultiPoly t11, t12, t22;  // Ã

    SymbolicForms() {
        const MultiPoly one(1), k2 = k * k, a2 = a * a, s2 = s * s;
        beta = (2 * p - MultiPoly(3)) * k2 - (p - MultiPoly(2)) * k;
        gamma = (p - one) * k2 - (p - MultiPoly(2)) * k;
        v_num = beta * s2 + gamma * k2 * a2;
        v_den = (p - one) * s2 + k2 * a2;
        big_a = s2 + k2 * a2;
        big_b = s2 + (p - one) * k2 * a2;
        t11 = s2 + (p - one) * k2 * a2;
        t12 = (p - MultiPoly(2)) * k * a * s;
        t22 = k2 * a2 + (p - one) * s2;
    }

    /// v_den · dP/dθ for P(a, s), using a_θ = s and a_θθ = -V a.
    MultiPoly cleared_theta_derivative(const MultiPoly& P) const {
        return v_den * P.diff(MultiPoly::A) * s - P.diff(MultiPoly::S) * v_num * a;
    }
};

struct PolyIdentity {
    std::string name;
    MultiPoly lhs;
    MultiPoly rhs;
    MultiPoly remainder() const { return lhs - rhs; }
};

inline std::vector<PolyIdentity> det_identities() {
    SymbolicForms f;
    const MultiPoly det = f.t11 * f.t22 - f.t12 * f.t12;
    return {{"det_atilde", det, (f.p - MultiPoly(1)) * f.big_a.pow(2)}};
}

/// Every step of the sign chain, each stated as lhs == rhs after clearing V's denominator.
inline std::vector<PolyIdentity> sign_chain_identities() {
    SymbolicForms f;
    const auto &a = f.a, &s = f.s, &k = f.k, &p = f.p;
    const MultiPoly one(1), k2 = k * k, a2 = a * a, s2 = s * s;
    std::vector<PolyIdentity> out;

    // numerators of 3k²-V and (p-1)k²-(p-3)V
    const MultiPoly c1 = 3 * k2 * (p - one) - f.beta;
    const MultiPoly c2 = 3 * k2 - f.gamma;
    const MultiPoly c3 = (p - one).pow(2) * k2 - (p - MultiPoly(3)) * f.beta;
    const MultiPoly c4 = (p - one) * k2 - (p - MultiPoly(3)) * f.gamma;
    const MultiPoly p2 = p * p;
    out.push_back({"coef_1", c1, p * (k2 + k) - 2 * k});
    out.push_back({"coef_2", c2, p * (k - k2) + 4 * k2 - 2 * k});
    out.push_back({"coef_3", c3, p2 * (k - k2) + p * (7 * k2 - 5 * k) + (6 * k - 8 * k2)});
    out.push_back({"coef_4", c4, p2 * (k - k2) + p * (5 * k2 - 5 * k) + (6 * k - 4 * k2)});

    // D · v_den against the quartic
    const MultiPoly three_minus_v = 3 * k2 * f.v_den - f.v_num;
    const MultiPoly lin_minus_v = (p - one) * k2 * f.v_den - (p - MultiPoly(3)) * f.v_num;
    const MultiPoly d_cleared = three_minus_v * s2 + lin_minus_v * k2 * a2;
    out.push_back({"D_numerator_split", d_cleared, (c1 * s2 + c2 * k2 * a2) * s2 + (c3 * s2 + c4 * k2 * a2) * k2 * a2});
    const MultiPoly e1 = p * (k2 + k) - 2 * k;
    const MultiPoly e2 = p2 * (k - k2) + p * (6 * k2 - 4 * k) + (4 * k - 4 * k2);
    const MultiPoly e3 = p2 * (k - k2) + p * (5 * k2 - 5 * k) + (6 * k - 4 * k2);
    const MultiPoly magic = s2 * s2 * e1 + s2 * k2 * a2 * e2 + k2 * k2 * a2 * a2 * e3;
    out.push_back({"D_equals_magic", d_cleared, magic});
    const MultiPoly bracket = e1 * s2 + e3 * k2 * a2;
    out.push_back({"magic_factorizes", magic, bracket * f.big_a});
    const MultiPoly lead = (k + one) * p - MultiPoly(2);
    const MultiPoly quad = (one - k) * p2 + (5 * k - 5) * p - 4 * k + MultiPoly(6);
    out.push_back({"factorizes_rewrite", bracket, lead * k * s2 + quad * k * k2 * a2});
    // (1-k)(p-p1)(p-p2) with p1+p2 = 5 and (k-1) p1 p2 = 4k-6
    out.push_back({"critical_product", quad, (one - k) * (p2 - 5 * p) - (4 * k - MultiPoly(6))});
    out.push_back({"critical_discriminant", 25 * (k - one) - (9 * k - one), 4 * (4 * k - MultiPoly(6))});

    // q_θ bracket: ((4-p)/2) A_θ B - A B_θ = a s (2-p) D, all times v_den
    const MultiPoly a_theta = f.cleared_theta_derivative(f.big_a);
    const MultiPoly b_theta = f.cleared_theta_derivative(f.big_b);
    out.push_back({"A_theta", a_theta, 2 * a * s * (k2 * f.v_den - f.v_num)});
    out.push_back({"B_theta", b_theta, 2 * a * s * ((p - one) * k2 * f.v_den - f.v_num)});
    const MultiPoly qform = (MultiPoly(4) - p) * a_theta * f.big_b - 2 * f.big_a * b_theta;
    out.push_back({"q_form_factor", qform, 2 * a * s * (MultiPoly(2) - p) * d_cleared});
    const MultiPoly c_bracket = (MultiPoly(4) - p) * (k2 * f.v_den - f.v_num) * f.big_b -
                                2 * ((p - one) * k2 * f.v_den - f.v_num) * f.big_a;
    out.push_back({"C_equals_2mp_D", c_bracket, (MultiPoly(2) - p) * d_cleared});

    // sign of (τq)_θ: B_θ a s - B (a s)_θ, then the simplified and factored forms
    const MultiPoly as_theta = f.cleared_theta_derivative(a * s);
    const MultiPoly tq = b_theta * a * s - f.big_b * as_theta;
    const MultiPoly simplified = (p - one) * k2 * f.v_num * a2 * a2 + ((p - one) * k2 * f.v_den - f.v_num) * a2 * s2 -
                                 f.v_den * s2 * s2;
    out.push_back({"tauq_simplifies", tq, simplified});
    out.push_back({"tauq_factorizes", simplified, ((p - one) * k2 * a2 - s2) * (f.v_num * a2 + f.v_den * s2)});
    return out;
}

/// p = 4 specializations: V at a = 0 and (τq)_θ = 2V/(3k) at a_θ = 0.
inline std::vector<PolyIdentity> p4_identities() {
    SymbolicForms f;
    const auto &a = f.a, &s = f.s, &k = f.k;
    auto at4 = [](const MultiPoly& m) { return m.substitute(MultiPoly::P, Rational(4)); };
    std::vector<PolyIdentity> out;
    const MultiPoly k2 = k * k;
    out.push_back({"p4_V_at_a0", 3 * at4(f.v_num).substitute(MultiPoly::A, Rational(0)),
                   (5 * k2 - 2 * k) * at4(f.v_den).substitute(MultiPoly::A, Rational(0))});
    // τq = -2k a s / B; d/dθ numerator times v_den is -2k (v_den (as)_θ B - a s v_den B_θ)
    const MultiPoly num = -2 * k * (f.cleared_theta_derivative(a * s) * f.big_b - a * s * f.cleared_theta_derivative(f.big_b));
    out.push_back({"p4_tauq_at_crest", 3 * k * at4(num).substitute(MultiPoly::S, Rational(0)),
                   2 * at4(f.v_num * f.big_b.pow(2)).substitute(MultiPoly::S, Rational(0))});
    return out;
}

inline CheckReport check_identities(const std::string& name, const std::vector<PolyIdentity>& ids,
                                    const std::array<Rational, 4>& spot) {
    CheckReport rep{name, true, {}, {}};
    std::ostringstream detail;
    std::size_t surviving = 0, spot_fail = 0;
    for (const auto& id : ids) {
        const MultiPoly rem = id.remainder();
        if (!rem.is_zero()) {
            rep.pass = false;
            surviving += rem.size();
            detail << id.name << ": " << rem.str() << "; ";
        }
        if (id.lhs.evaluate(spot) != id.rhs.evaluate(spot)) {
            rep.pass = false;
            ++spot_fail;
            detail << id.name << ": spot check differs; ";
        }
    }
    rep.metric("identities", double(ids.size())).metric("surviving_terms", double(surviving))
        .metric("spot_check_failures", double(spot_fail));
    rep.detail = detail.str();
    return rep;
}

inline CheckReport verify_det_identity() {
    auto ids = det_identities();
    SymbolicForms f;
    ids.push_back({"p2_det_isotropic", (f.t11 * f.t22 - f.t12 * f.t12).substitute(MultiPoly::P, Rational(2)),
                   f.big_a.pow(2)});
    return check_identities("det_identity", ids, {Rational(2), Rational(3), Rational(5), Rational(7)});
}

inline CheckReport verify_sign_chain() {
    auto ids = sign_chain_identities();
    for (auto& id : p4_identities()) ids.push_back(std::move(id));
    return check_identities("sign_chain", ids, {Rational(1), Rational(1), Rational(3), Rational(5)});
}

struct CriticalExponents {
    double p1;
    double p2;
};

inline CriticalExponents critical_exponents(double k) {
    if (!(k > 1.0)) throw DomainError("critical_exponents: k must exceed 1");
    const double h = 0.5 * std::sqrt((9.0 * k - 1.0) / (k - 1.0));
    return {2.5 - h, 2.5 + h};
}

namespace detail {

inline Dual q_jet(const AngularProfile& prof, double th) {
    const auto [a, s] = prof.jet(th);
    return q_of(a, s, prof.params().k, prof.params().p);
}

inline Dual tauq_jet(const AngularProfile& prof, double th) {
    const auto [a, s] = prof.jet(th);
    const double k = prof.params().k, p = prof.params().p;
    return -((p - 2.0) * k) * a * s / (s * s + (p - 1.0) * k * k * a * a);
}

inline double d_of(double a, double s, double k, double p) {
    const double V = potential(a, s, k, p);
    return (3.0 * k * k - V) * s * s + ((p - 1.0) * k * k - (p - 3.0) * V) * k * k * a * a;
}

template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Checks d(τq)/dθ > margin·max|τq|/period at every local minimum of q.
inline CheckReport verify_tauq_sign(const ProblemParams& pp, const AngularProfile& prof, double margin = 1e-8) {
    if (pp.k < 2.0) {
        std::ostringstream os;
        os << "verify_tauq_sign: requires k >= 2, got k = " << pp.k;
        throw DomainError(os.str());
    }
    const std::size_t n = prof.size();
    const double h = prof.spacing(), T = pp.period();
    std::vector<double> q(n), tq(n);
    double tq_max = 0.0, a_max = 0.0, s_max = 0.0, d_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = prof.a()[j], s = prof.a_theta()[j];
        q[j] = q_of(a, s, pp.k, pp.p);
        tq[j] = q[j] * tau_of(a, s, pp.k, pp.p);
        tq_max = std::max(tq_max, std::abs(tq[j]));
        a_max = std::max(a_max, std::abs(a));
        s_max = std::max(s_max, std::abs(s));
        d_max = std::max(d_max, std::abs(detail::d_of(a, s, pp.k, pp.p)));
    }
    const double threshold = margin * tq_max / T;

    CheckReport rep{"tauq_sign", true, {}, {}};
    std::ostringstream det;
    auto qt = [&](double th) { return detail::q_jet(prof, th).d; };

    // minima: nodewise comparison, parabola refinement, then a root of q_θ in the bracketing cell
    std::size_t n_min = 0;
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double qm = q[(j + n - 1) % n], q0 = q[j], qp = q[(j + 1) % n];
        if (!(q0 <= qm && q0 < qp)) continue;
        const double curv = qm - 2.0 * q0 + qp;
        double th = prof.theta_grid()[j] + (curv > 0 ? 0.5 * h * (qm - qp) / curv : 0.0);
        const double lo = prof.theta_grid()[j] - h, hi = prof.theta_grid()[j] + h;
        if ((qt(lo) < 0) != (qt(hi) < 0)) th = detail::bisect(qt, lo, hi);
        const double d_tq = detail::tauq_jet(prof, th).d;
        ++n_min;
        worst_ratio = std::min(worst_ratio, d_tq / threshold);
        if (!(d_tq > threshold)) {
            rep.pass = false;
            det << "non-positive d(tau q)/dtheta = " << d_tq << " at theta0 = " << th << "; ";
        }
    }
    if (n_min == 0) {
        rep.pass = false;
        det << "no local minimum of q found; ";
    }

    // zero set of q_θ against {a = 0} ∪ {a_θ = 0} ∪ {D = 0}
    double zero_dev = 0.0, a0_qtt = -std::numeric_limits<double>::infinity();
    std::size_t n_zero = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = prof.theta_grid()[j], hi = lo + h;
        if ((qt(lo) < 0) == (qt(hi) < 0)) continue;
        const double th = detail::bisect(qt, lo, hi);
        const double a = prof.value(th), s = prof.slope(th);
        const double dev = std::min({std::abs(a) / a_max, std::abs(s) / s_max,
                                     std::abs(detail::d_of(a, s, pp.k, pp.p)) / d_max});
        zero_dev = std::max(zero_dev, dev);
        ++n_zero;
        if (std::abs(a) / a_max < 1e-6) {
            const double e = 1e-4;
            const double qtt = (qt(th + e) - qt(th - e)) / (2 * e);
            a0_qtt = std::max(a0_qtt, qtt);
        }
    }
    if (zero_dev > 1e-6) {
        rep.pass = false;
        det << "q_theta vanishes away from a = 0, a_theta = 0, D = 0 (deviation " << zero_dev << "); ";
    }
    if (pp.p == 4.0 && !(a0_qtt < 0.0)) {
        rep.pass = false;
        det << "a = 0 points are not strict maxima of q; ";
    }
    rep.metric("p", pp.p).metric("N", pp.N).metric("k", pp.k).metric("local_minima", double(n_min))
        .metric("min_margin_ratio", worst_ratio).metric("threshold", threshold)
        .metric("q_theta_zeros", double(n_zero)).metric("zero_set_deviation", zero_dev)
        .metric("max_q_thetatheta_at_a_zero", a0_qtt);
    rep.detail = det.str();
    return rep;
}

}  // namespace plap
