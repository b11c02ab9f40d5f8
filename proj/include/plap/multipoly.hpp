#pragma once

#include <array>
#include <map>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace plap {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial in the fixed variables (a, s, k, p) with exact rational coefficients.
class MultiPoly {
public:
    enum Var { A = 0, S = 1, K = 2, P = 3 };
    using Exponent = std::array<int, 4>;

    struct GradedLex {
        bool operator()(const Exponent& x, const Exponent& y) const {
            const int dx = x[0] + x[1] + x[2] + x[3], dy = y[0] + y[1] + y[2] + y[3];
            if (dx != dy) return dx > dy;
            return x > y;
        }
    };
    using Terms = std::map<Exponent, Rational, GradedLex>;

    MultiPoly() = default;
    MultiPoly(const Rational& c) { add_term({0, 0, 0, 0}, c); }
    MultiPoly(long long c) : MultiPoly(Rational(c)) {}

    static MultiPoly var(Var v, int power = 1) {
        Exponent e{0, 0, 0, 0};
        e[v] = power;
        MultiPoly m;
        m.add_term(e, 1);
        return m;
    }
    static MultiPoly a() { return var(A); }
    static MultiPoly s() { return var(S); }
    static MultiPoly k() { return var(K); }
    static MultiPoly p() { return var(P); }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    void add_term(const Exponent& e, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    MultiPoly& operator+=(const MultiPoly& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

    friend MultiPoly operator+(MultiPoly x, const MultiPoly& y) { return x += y; }
    friend MultiPoly operator-(MultiPoly x, const MultiPoly& y) { return x -= y; }
    friend MultiPoly operator-(const MultiPoly& x) { return MultiPoly() - x; }
    friend MultiPoly operator*(const MultiPoly& x, const MultiPoly& y) {
        MultiPoly out;
        for (const auto& [ex, cx] : x.terms_)
            for (const auto& [ey, cy] : y.terms_)
                out.add_term({ex[0] + ey[0], ex[1] + ey[1], ex[2] + ey[2], ex[3] + ey[3]}, cx * cy);
        return out;
    }
    friend bool operator==(const MultiPoly& x, const MultiPoly& y) { return x.terms_ == y.terms_; }

    MultiPoly scale(const Rational& c) const { return *this * MultiPoly(c); }

    MultiPoly pow(int n) const {
        MultiPoly out(1);
        for (int i = 0; i < n; ++i) out *= *this;
        return out;
    }

    MultiPoly substitute(Var v, const MultiPoly& repl) const {
        MultiPoly out;
        for (const auto& [e, c] : terms_) {
            Exponent rest = e;
            rest[v] = 0;
            MultiPoly t;
            t.add_term(rest, c);
            out += t * repl.pow(e[v]);
        }
        return out;
    }
    MultiPoly substitute(Var v, const Rational& value) const { return substitute(v, MultiPoly(value)); }

    /// Partial derivative in one variable.
    MultiPoly diff(Var v) const {
        MultiPoly out;
        for (const auto& [e, c] : terms_) {
            if (e[v] == 0) continue;
            Exponent d = e;
            d[v] -= 1;
            out.add_term(d, c * e[v]);
        }
        return out;
    }

    Rational evaluate(const std::array<Rational, 4>& x) const {
        Rational acc = 0;
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < e[i]; ++j) t *= x[i];
            acc += t;
        }
        return acc;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        static constexpr const char* names[4] = {"a", "s", "k", "p"};
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            first = false;
            const Rational mag = c < 0 ? Rational(-c) : c;
            const bool constant = e == Exponent{0, 0, 0, 0};
            if (mag != 1 || constant) os << mag;
            for (int i = 0; i < 4; ++i) {
                if (e[i] == 0) continue;
                os << names[i];
                if (e[i] > 1) os << '^' << e[i];
            }
        }
        return os.str();
    }

private:
    Terms terms_;
};

}  // namespace plap
