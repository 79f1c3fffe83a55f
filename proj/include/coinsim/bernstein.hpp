#ifndef COINSIM_BERNSTEIN_HPP
#define COINSIM_BERNSTEIN_HPP

// Exact arithmetic on polynomials in Bernstein form: evaluation, degree
// elevation, ring operations, the coefficient partial order, the Bernstein
// operator, dyadic rounding primitives and the two-regime scale Delta_n.
//
// A polynomial of degree n is stored by its normalized Bernstein coefficients
// c_0..c_n, i.e. p(x) = sum_k c_k C(n,k) x^k (1-x)^(n-k). The order q <= r at
// degree n means every degree-n coefficient of r - q is nonnegative; it
// depends on the representation degree, which therefore stays explicit
// everywhere.

#include "interval.hpp"
#include "poly.hpp"
#include "rational.hpp"

#include <mpfr.h>

#include <stdexcept>
#include <vector>

namespace coinsim {

struct BernsteinPoly {
    unsigned degree = 0;
    std::vector<Rational> coeffs;  // size degree + 1

    BernsteinPoly() : coeffs(1, Rational(0)) {}

    BernsteinPoly(unsigned deg, std::vector<Rational> c) : degree(deg), coeffs(std::move(c)) {
        if (coeffs.size() != degree + 1)
            throw std::invalid_argument("BernsteinPoly: coefficient count must be degree + 1");
    }

    static BernsteinPoly constant(unsigned deg, const Rational& v) {
        return BernsteinPoly(deg, std::vector<Rational>(deg + 1, v));
    }

    bool operator==(const BernsteinPoly& o) const { return degree == o.degree && coeffs == o.coeffs; }
};

// Scaled integer view: p = (1/denom) sum_k units[k] x^k (1-x)^(n-k).
// All hot paths (evaluation grids, elevation, order checks) run on this to
// keep rational gcd work out of inner loops.
struct ScaledUnits {
    unsigned degree = 0;
    Integer denom = 1;
    std::vector<Integer> units;
};

inline ScaledUnits make_scaled(const BernsteinPoly& p) {
    ScaledUnits s;
    s.degree = p.degree;
    auto row = binomial_row(p.degree);
    Integer denom(1);
    for (const auto& c : p.coeffs) {
        Integer g;
        mpz_gcd(g.get_mpz_t(), denom.get_mpz_t(), c.get_den_mpz_t());
        denom *= c.get_den() / g;
    }
    s.denom = denom;
    s.units.resize(p.degree + 1);
    for (unsigned k = 0; k <= p.degree; ++k)
        s.units[k] = p.coeffs[k].get_num() * (*row)[k] * (denom / p.coeffs[k].get_den());
    return s;
}

// sum_k units[k] u^k (v-u)^(n-k) by Horner; value = result / (denom * v^n)
inline Integer eval_scaled_numerator(const std::vector<Integer>& units, const Integer& u,
                                     const Integer& v) {
    const std::size_t n = units.size() - 1;
    Integer w = v - u;
    Integer acc = units[n];
    Integer wpow(1);
    for (std::size_t k = n; k-- > 0;) {
        wpow *= w;
        acc = acc * u + units[k] * wpow;
    }
    return acc;
}

inline Rational eval_scaled(const ScaledUnits& s, const Rational& x) {
    const Integer& u = x.get_num();
    const Integer& v = x.get_den();
    Integer num = eval_scaled_numerator(s.units, u, v);
    return make_rat(num, s.denom * pow_int(v, s.degree));
}

// Directed fixed-precision enclosure of p(x) for x = u/v in [0,1]: two
// Horner passes with downward/upward rounding. Exact arithmetic at degree
// several thousand is needless for one-sided grid comparisons; the returned
// bounds are sound either way.
class DirectedValue {
  public:
    explicit DirectedValue(mpfr_prec_t prec = 192) {
        mpfr_init2(lo_, prec);
        mpfr_init2(hi_, prec);
    }
    ~DirectedValue() {
        mpfr_clear(lo_);
        mpfr_clear(hi_);
    }
    DirectedValue(const DirectedValue&) = delete;
    DirectedValue& operator=(const DirectedValue&) = delete;

    // bound <= q ?
    bool certainly_leq(const Rational& q) const { return mpfr_cmp_q(hi_, q.get_mpq_t()) <= 0; }
    bool certainly_geq(const Rational& q) const { return mpfr_cmp_q(lo_, q.get_mpq_t()) >= 0; }
    bool certainly_greater(const Rational& q) const { return mpfr_cmp_q(lo_, q.get_mpq_t()) > 0; }
    bool certainly_less(const Rational& q) const { return mpfr_cmp_q(hi_, q.get_mpq_t()) < 0; }

    // joint pass tracking both directed bounds; sound for any coefficient
    // signs because each term picks the wpow bound matching its sign
    void eval(const ScaledUnits& s, unsigned long u, unsigned long v) {
        const std::size_t d = s.degree;
        mpfr_prec_t prec = mpfr_get_prec(lo_);
        mpfr_t wlo, whi, term;
        mpfr_init2(wlo, prec);
        mpfr_init2(whi, prec);
        mpfr_init2(term, prec);
        unsigned long w = v - u;
        mpfr_set_z(lo_, s.units[d].get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(hi_, s.units[d].get_mpz_t(), MPFR_RNDU);
        mpfr_set_ui(wlo, 1, MPFR_RNDD);
        mpfr_set_ui(whi, 1, MPFR_RNDU);
        for (std::size_t k = d; k-- > 0;) {
            mpfr_mul_ui(wlo, wlo, w, MPFR_RNDD);
            mpfr_mul_ui(whi, whi, w, MPFR_RNDU);
            bool nonneg = s.units[k] >= 0;
            mpfr_mul_ui(lo_, lo_, u, MPFR_RNDD);
            mpfr_mul_z(term, nonneg ? wlo : whi, s.units[k].get_mpz_t(), MPFR_RNDD);
            mpfr_add(lo_, lo_, term, MPFR_RNDD);
            mpfr_mul_ui(hi_, hi_, u, MPFR_RNDU);
            mpfr_mul_z(term, nonneg ? whi : wlo, s.units[k].get_mpz_t(), MPFR_RNDU);
            mpfr_add(hi_, hi_, term, MPFR_RNDU);
        }
        Integer div = s.denom * pow_int(Integer(static_cast<long>(v)), static_cast<unsigned long>(d));
        mpfr_div_z(lo_, lo_, div.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(hi_, hi_, div.get_mpz_t(), MPFR_RNDU);
        mpfr_clear(wlo);
        mpfr_clear(whi);
        mpfr_clear(term);
    }

  private:
    mpfr_t lo_, hi_;
};

// Exact evaluation at rational x in [0,1].
inline Rational eval(const BernsteinPoly& p, const Rational& x) {
    if (x < 0 || x > 1) throw std::domain_error("eval: point outside [0,1]");
    return eval_scaled(make_scaled(p), x);
}

// Convolution with a binomial row: raises a scaled-unit vector from degree n
// to degree m without touching the denominator.
inline std::vector<Integer> elevate_units(const std::vector<Integer>& units, unsigned n, unsigned m) {
    if (m < n) throw std::invalid_argument("elevate_units: target degree below source");
    if (m == n) return units;
    auto row = binomial_row(m - n);
    std::vector<Integer> out(m + 1);
    for (unsigned k = 0; k <= m; ++k) {
        Integer acc(0);
        unsigned jlo = k > (m - n) ? k - (m - n) : 0;
        unsigned jhi = std::min(n, k);
        for (unsigned j = jlo; j <= jhi; ++j) acc += units[j] * (*row)[k - j];
        out[k] = std::move(acc);
    }
    return out;
}

// Degree elevation; the result equals p pointwise and its coefficients are
// convex combinations of the input coefficients.
inline BernsteinPoly elevate(const BernsteinPoly& p, unsigned m) {
    if (m < p.degree) throw std::invalid_argument("elevate: target degree below polynomial degree");
    if (m == p.degree) return p;
    ScaledUnits s = make_scaled(p);
    std::vector<Integer> raised = elevate_units(s.units, p.degree, m);
    auto row = binomial_row(m);
    std::vector<Rational> out(m + 1);
    for (unsigned k = 0; k <= m; ++k) out[k] = make_rat(raised[k], s.denom * (*row)[k]);
    return BernsteinPoly(m, std::move(out));
}

inline BernsteinPoly add(const BernsteinPoly& p, const BernsteinPoly& q) {
    unsigned m = std::max(p.degree, q.degree);
    BernsteinPoly a = elevate(p, m), b = elevate(q, m);
    for (unsigned k = 0; k <= m; ++k) a.coeffs[k] += b.coeffs[k];
    return a;
}

inline BernsteinPoly sub(const BernsteinPoly& p, const BernsteinPoly& q) {
    unsigned m = std::max(p.degree, q.degree);
    BernsteinPoly a = elevate(p, m), b = elevate(q, m);
    for (unsigned k = 0; k <= m; ++k) a.coeffs[k] -= b.coeffs[k];
    return a;
}

inline BernsteinPoly scale(const BernsteinPoly& p, const Rational& s) {
    BernsteinPoly r = p;
    for (auto& c : r.coeffs) c *= s;
    return r;
}

// Product in Bernstein form; output degree is the sum of the input degrees.
inline BernsteinPoly mul(const BernsteinPoly& p, const BernsteinPoly& q) {
    ScaledUnits sp = make_scaled(p), sq = make_scaled(q);
    unsigned n = p.degree + q.degree;
    std::vector<Integer> conv(n + 1, Integer(0));
    for (unsigned i = 0; i <= p.degree; ++i) {
        if (sp.units[i] == 0) continue;
        for (unsigned j = 0; j <= q.degree; ++j) conv[i + j] += sp.units[i] * sq.units[j];
    }
    auto row = binomial_row(n);
    Integer denom = sp.denom * sq.denom;
    std::vector<Rational> out(n + 1);
    for (unsigned k = 0; k <= n; ++k) out[k] = make_rat(conv[k], denom * (*row)[k]);
    return BernsteinPoly(n, std::move(out));
}

// Derivative as a Bernstein polynomial of degree n-1.
inline BernsteinPoly derivative(const BernsteinPoly& p) {
    if (p.degree == 0) return BernsteinPoly(0, {Rational(0)});
    std::vector<Rational> d(p.degree);
    for (unsigned k = 0; k + 1 <= p.degree; ++k)
        d[k] = Rational(static_cast<long>(p.degree)) * (p.coeffs[k + 1] - p.coeffs[k]);
    return BernsteinPoly(p.degree - 1, std::move(d));
}

inline BernsteinPoly derivative(const BernsteinPoly& p, unsigned order) {
    BernsteinPoly r = p;
    for (unsigned j = 0; j < order; ++j) r = derivative(r);
    return r;
}

// q <= r in the degree-n coefficient order: every degree-n Bernstein
// coefficient of r - q is nonnegative (exact comparison).
inline bool leq_order(const BernsteinPoly& q, const BernsteinPoly& r, unsigned n) {
    if (n < q.degree || n < r.degree)
        throw std::invalid_argument("leq_order: comparison degree below operand degree");
    ScaledUnits sq = make_scaled(q), sr = make_scaled(r);
    std::vector<Integer> uq = elevate_units(sq.units, q.degree, n);
    std::vector<Integer> ur = elevate_units(sr.units, r.degree, n);
    // compare ur[k]/dr >= uq[k]/dq without building rationals
    for (unsigned k = 0; k <= n; ++k)
        if (ur[k] * sq.denom < uq[k] * sr.denom) return false;
    return true;
}

// B_n from samples f(k/n), k = 0..n.
inline BernsteinPoly bernstein_op(std::vector<Rational> samples, unsigned n) {
    if (samples.size() != n + 1)
        throw std::invalid_argument("bernstein_op: need exactly n+1 samples");
    return BernsteinPoly(n, std::move(samples));
}

// Largest a' with C(n,k) a' an integer multiple of 2^-grid and a' <= a - slack.
// The returned mantissa is 2^grid * C(n,k) * a' (the simulator's unit count).
struct DyadicCoeff {
    Integer mantissa;
    Rational value;
};

inline DyadicCoeff round_coeff_down(const Rational& a, unsigned k, unsigned n, unsigned grid,
                                    const Rational& slack) {
    const Integer& C = binomial(n, k);
    Integer m = floor_rat((a - slack) * Rational(C) * Rational(pow2_int(grid)));
    return {m, make_rat(m, C * pow2_int(grid))};
}

inline DyadicCoeff round_coeff_up(const Rational& b, unsigned k, unsigned n, unsigned grid,
                                  const Rational& slack) {
    const Integer& C = binomial(n, k);
    Integer m = ceil_rat((b + slack) * Rational(C) * Rational(pow2_int(grid)));
    return {m, make_rat(m, C * pow2_int(grid))};
}

// Enclosure of Delta_n(x) = max{ sqrt(x(1-x)/n), 1/n }; exact whenever
// x(1-x)/n is a perfect rational square (endpoints, ties, ...).
inline RatInterval delta_n(const Rational& x, unsigned n, unsigned long prec_bits = 64) {
    if (x < 0 || x > 1) throw std::domain_error("delta_n: point outside [0,1]");
    if (n == 0) throw std::invalid_argument("delta_n: n must be positive");
    Rational s = x * (Rational(1) - x) / Rational(static_cast<long>(n));
    RatInterval root = nth_root_enclosure(s, 2, prec_bits);
    RatInterval inv_n = RatInterval::point(make_rat(1, static_cast<long>(n)));
    return interval_max(root, inv_n);
}

// Conversions to and from the monomial basis (test oracles and the operator
// machinery both need them).
inline Poly to_monomial(const BernsteinPoly& p) {
    ScaledUnits s = make_scaled(p);
    std::vector<Rational> m(p.degree + 1, Rational(0));
    for (unsigned k = 0; k <= p.degree; ++k) {
        if (s.units[k] == 0) continue;
        auto row = binomial_row(p.degree - k);
        for (unsigned i = 0; i + k <= p.degree; ++i) {
            Rational term = make_rat(s.units[k] * (*row)[i], s.denom);
            if (i % 2 == 1) term = -term;
            m[k + i] += term;
        }
    }
    return Poly(std::move(m));
}

inline BernsteinPoly from_monomial(const Poly& p, unsigned n) {
    if (p.degree() > static_cast<int>(n))
        throw std::invalid_argument("from_monomial: degree exceeds target");
    auto rowN = binomial_row(n);
    std::vector<Rational> c(n + 1, Rational(0));
    for (unsigned k = 0; k <= n; ++k) {
        auto rowK = binomial_row(k);
        Rational acc(0);
        for (unsigned i = 0; i <= k && i < p.c.size(); ++i)
            acc += p.c[i] * make_rat((*rowK)[i], (*rowN)[i]);
        c[k] = acc;
    }
    return BernsteinPoly(n, std::move(c));
}

}  // namespace coinsim

#endif
