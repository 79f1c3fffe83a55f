#ifndef COINSIM_INTERVAL_HPP
#define COINSIM_INTERVAL_HPP

// Directed rational intervals and certified enclosures of algebraic values
// (q-th roots, rational powers). Construction-side code consumes only the
// directed endpoints, never midpoints.

#include "rational.hpp"

#include <stdexcept>

namespace coinsim {

struct precision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RatInterval {
    Rational lo, hi;

    RatInterval() = default;
    explicit RatInterval(Rational point) : lo(point), hi(std::move(point)) {}
    RatInterval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw std::invalid_argument("RatInterval: lo > hi");
    }

    static RatInterval point(const Rational& v) { return RatInterval(v); }

    Rational width() const { return hi - lo; }
    bool is_point() const { return lo == hi; }
    Rational mid() const { return (lo + hi) / 2; }
    bool contains(const Rational& v) const { return lo <= v && v <= hi; }
    bool contains(const RatInterval& other) const { return lo <= other.lo && other.hi <= hi; }

    RatInterval operator+(const RatInterval& o) const { return {lo + o.lo, hi + o.hi}; }
    RatInterval operator-(const RatInterval& o) const { return {lo - o.hi, hi - o.lo}; }
    RatInterval operator-() const { return {-hi, -lo}; }

    RatInterval operator*(const RatInterval& o) const {
        Rational a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
        return {rat_min(rat_min(a, b), rat_min(c, d)), rat_max(rat_max(a, b), rat_max(c, d))};
    }

    RatInterval operator*(const Rational& s) const {
        if (s >= 0) return {lo * s, hi * s};
        return {hi * s, lo * s};
    }

    RatInterval operator+(const Rational& s) const { return {lo + s, hi + s}; }
};

// Enclosure of y^(1/q) for y >= 0 with width <= 2^(1-prec_bits); exact
// (point interval) when y is a perfect q-th power of a rational.
inline RatInterval nth_root_enclosure(const Rational& y, unsigned long q, unsigned long prec_bits) {
    if (y < 0) throw std::domain_error("nth_root_enclosure: negative radicand");
    if (q == 0) throw std::invalid_argument("nth_root_enclosure: q = 0");
    if (q == 1 || y == 0) return RatInterval::point(y);

    Integer num_root, den_root;
    int num_exact = mpz_root(num_root.get_mpz_t(), y.get_num_mpz_t(), q);
    int den_exact = mpz_root(den_root.get_mpz_t(), y.get_den_mpz_t(), q);
    if (num_exact && den_exact) return RatInterval::point(make_rat(num_root, den_root));

    // floor((y * 2^(q*prec))^(1/q)) / 2^prec  <=  y^(1/q)
    Integer grid = pow2_int(prec_bits);
    Integer scale = pow_int(grid, q);
    Integer t_lo = floor_rat(y * Rational(scale));
    Integer t_hi = ceil_rat(y * Rational(scale));
    Integer m_lo, m_hi;
    mpz_root(m_lo.get_mpz_t(), t_lo.get_mpz_t(), q);
    int hi_exact = mpz_root(m_hi.get_mpz_t(), t_hi.get_mpz_t(), q);
    if (!hi_exact) m_hi += 1;
    return {make_rat(m_lo, grid), make_rat(m_hi, grid)};
}

// Enclosure of x^(p/q) for x >= 0, p >= 0, q >= 1.
inline RatInterval rational_power_enclosure(const Rational& x, unsigned long p, unsigned long q,
                                            unsigned long prec_bits) {
    if (x < 0) throw std::domain_error("rational_power_enclosure: negative base");
    if (p == 0) return RatInterval::point(Rational(1));
    return nth_root_enclosure(pow_rat(x, static_cast<long>(p)), q, prec_bits);
}

// Enclosure of 1/v for an interval v with 0 < v.lo.
inline RatInterval reciprocal_enclosure(const RatInterval& v) {
    if (v.lo <= 0) throw std::domain_error("reciprocal_enclosure: interval touches 0");
    return {make_rat(v.hi.get_den(), v.hi.get_num()), make_rat(v.lo.get_den(), v.lo.get_num())};
}

inline RatInterval interval_max(const RatInterval& a, const RatInterval& b) {
    return {rat_max(a.lo, b.lo), rat_max(a.hi, b.hi)};
}

}  // namespace coinsim

#endif
