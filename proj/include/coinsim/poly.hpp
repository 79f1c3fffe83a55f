#ifndef COINSIM_POLY_HPP
#define COINSIM_POLY_HPP

// Dense exact polynomials in the monomial basis: univariate over x, and
// bivariate over (x, n) for the correction polynomials whose degree in the
// second variable matters.

#include "rational.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace coinsim {

struct Poly {
    // c[i] multiplies x^i; empty vector = zero polynomial
    std::vector<Rational> c;

    Poly() = default;
    explicit Poly(std::vector<Rational> coeffs) : c(std::move(coeffs)) { trim(); }

    static Poly zero() { return Poly(); }
    static Poly constant(Rational v) { return Poly({std::move(v)}); }
    static Poly x() { return Poly({Rational(0), Rational(1)}); }

    static Poly monomial(unsigned d, Rational coeff = Rational(1)) {
        std::vector<Rational> v(d + 1, Rational(0));
        v[d] = std::move(coeff);
        return Poly(std::move(v));
    }

    bool is_zero() const { return c.empty(); }
    int degree() const { return static_cast<int>(c.size()) - 1; }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }

    const Rational& coeff(std::size_t i) const {
        static const Rational zero(0);
        return i < c.size() ? c[i] : zero;
    }

    Rational eval(const Rational& x) const {
        Rational acc(0);
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    double eval(double x) const {
        double acc = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + it->get_d();
        return acc;
    }

    Poly derivative() const {
        if (c.size() <= 1) return zero();
        std::vector<Rational> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * Rational(static_cast<long>(i));
        return Poly(std::move(d));
    }

    Poly operator+(const Poly& o) const {
        std::vector<Rational> r(std::max(c.size(), o.c.size()), Rational(0));
        for (std::size_t i = 0; i < c.size(); ++i) r[i] += c[i];
        for (std::size_t i = 0; i < o.c.size(); ++i) r[i] += o.c[i];
        return Poly(std::move(r));
    }

    Poly operator-(const Poly& o) const {
        std::vector<Rational> r(std::max(c.size(), o.c.size()), Rational(0));
        for (std::size_t i = 0; i < c.size(); ++i) r[i] += c[i];
        for (std::size_t i = 0; i < o.c.size(); ++i) r[i] -= o.c[i];
        return Poly(std::move(r));
    }

    Poly operator*(const Poly& o) const {
        if (is_zero() || o.is_zero()) return zero();
        std::vector<Rational> r(c.size() + o.c.size() - 1, Rational(0));
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < o.c.size(); ++j) r[i + j] += c[i] * o.c[j];
        return Poly(std::move(r));
    }

    Poly operator*(const Rational& s) const {
        std::vector<Rational> r(c);
        for (auto& v : r) v *= s;
        return Poly(std::move(r));
    }

    bool operator==(const Poly& o) const { return c == o.c; }
};

// p(a + b*x), exact
inline Poly compose_affine(const Poly& p, const Rational& a, const Rational& b) {
    Poly result;
    Poly arg({a, b});
    for (auto it = p.c.rbegin(); it != p.c.rend(); ++it) result = result * arg + Poly::constant(*it);
    return result;
}

// (x + shift)^d expanded
inline Poly shifted_power(const Rational& shift, unsigned d) {
    auto row = binomial_row(d);
    std::vector<Rational> c(d + 1);
    Rational pw(1);
    for (unsigned i = d + 1; i-- > 0;) {
        // coefficient of x^i is C(d,i) shift^(d-i)
        c[i] = Rational((*row)[i]) * pw;
        pw *= shift;
    }
    return Poly(std::move(c));
}

struct Poly2 {
    // c[i][d] multiplies x^i n^d
    std::vector<std::vector<Rational>> c;

    static Poly2 zero() { return Poly2{}; }

    static Poly2 constant(const Rational& v) {
        Poly2 p;
        if (v != 0) p.c = {{v}};
        return p;
    }

    bool is_zero() const { return c.empty(); }
    int deg_x() const { return static_cast<int>(c.size()) - 1; }

    int deg_n() const {
        int d = -1;
        for (const auto& row : c) d = std::max(d, static_cast<int>(row.size()) - 1);
        return d;
    }

    void trim() {
        for (auto& row : c)
            while (!row.empty() && row.back() == 0) row.pop_back();
        while (!c.empty() && c.back().empty()) c.pop_back();
    }

    const Rational& coeff(std::size_t i, std::size_t d) const {
        static const Rational zero(0);
        if (i >= c.size() || d >= c[i].size()) return zero;
        return c[i][d];
    }

    void add_term(std::size_t i, std::size_t d, const Rational& v) {
        if (i >= c.size()) c.resize(i + 1);
        if (d >= c[i].size()) c[i].resize(d + 1, Rational(0));
        c[i][d] += v;
    }

    Poly2 operator+(const Poly2& o) const {
        Poly2 r = *this;
        for (std::size_t i = 0; i < o.c.size(); ++i)
            for (std::size_t d = 0; d < o.c[i].size(); ++d) r.add_term(i, d, o.c[i][d]);
        r.trim();
        return r;
    }

    Poly2 operator-(const Poly2& o) const {
        Poly2 r = *this;
        for (std::size_t i = 0; i < o.c.size(); ++i)
            for (std::size_t d = 0; d < o.c[i].size(); ++d) r.add_term(i, d, -o.c[i][d]);
        r.trim();
        return r;
    }

    Poly2 operator*(const Poly2& o) const {
        Poly2 r;
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t d = 0; d < c[i].size(); ++d) {
                if (c[i][d] == 0) continue;
                for (std::size_t i2 = 0; i2 < o.c.size(); ++i2)
                    for (std::size_t d2 = 0; d2 < o.c[i2].size(); ++d2) {
                        if (o.c[i2][d2] == 0) continue;
                        r.add_term(i + i2, d + d2, c[i][d] * o.c[i2][d2]);
                    }
            }
        r.trim();
        return r;
    }

    Poly2 operator*(const Rational& s) const {
        Poly2 r = *this;
        for (auto& row : r.c)
            for (auto& v : row) v *= s;
        r.trim();
        return r;
    }

    Poly2 dx() const {
        Poly2 r;
        for (std::size_t i = 1; i < c.size(); ++i)
            for (std::size_t d = 0; d < c[i].size(); ++d)
                if (c[i][d] != 0) r.add_term(i - 1, d, c[i][d] * Rational(static_cast<long>(i)));
        r.trim();
        return r;
    }

    // x(1-x) * p, used by the central-moment recurrence
    Poly2 times_x_one_minus_x() const {
        Poly2 x1;
        x1.add_term(1, 0, Rational(1));
        x1.add_term(2, 0, Rational(-1));
        return x1 * (*this);
    }

    Poly eval_n(const Rational& n) const {
        std::vector<Rational> out(c.size(), Rational(0));
        for (std::size_t i = 0; i < c.size(); ++i) {
            Rational acc(0);
            for (auto it = c[i].rbegin(); it != c[i].rend(); ++it) acc = acc * n + *it;
            out[i] = acc;
        }
        return Poly(std::move(out));
    }

    bool operator==(const Poly2& o) const {
        Poly2 a = *this, b = o;
        a.trim();
        b.trim();
        return a.c == b.c;
    }
};

}  // namespace coinsim

#endif
