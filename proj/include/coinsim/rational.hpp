#ifndef COINSIM_RATIONAL_HPP
#define COINSIM_RATIONAL_HPP

// Exact scalar arithmetic used throughout: arbitrary-precision integers and
// canonical rationals (GMP-backed), dyadic rationals, and a binomial table.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinsim {

using Integer = mpz_class;
using Rational = mpq_class;

// mpq_class constructors do not canonicalize; route construction through here.
inline Rational make_rat(Integer num, Integer den) {
    if (den == 0) throw std::invalid_argument("make_rat: zero denominator");
    Rational r(std::move(num), std::move(den));
    r.canonicalize();
    return r;
}

inline Rational make_rat(long num, long den) { return make_rat(Integer(num), Integer(den)); }

inline Integer pow2_int(unsigned long e) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
    return r;
}

inline Rational pow2_rat(long e) {
    if (e >= 0) return Rational(pow2_int(static_cast<unsigned long>(e)));
    return make_rat(Integer(1), pow2_int(static_cast<unsigned long>(-e)));
}

inline Integer pow_int(const Integer& base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Rational pow_rat(const Rational& base, long e) {
    if (e == 0) return Rational(1);
    Integer num = pow_int(base.get_num(), static_cast<unsigned long>(e < 0 ? -e : e));
    Integer den = pow_int(base.get_den(), static_cast<unsigned long>(e < 0 ? -e : e));
    return e > 0 ? make_rat(num, den) : make_rat(den, num);
}

inline Integer floor_rat(const Rational& x) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

inline Integer ceil_rat(const Rational& x) {
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

inline bool is_integer(const Rational& x) { return x.get_den() == 1; }

inline std::string rat_to_string(const Rational& x) {
    if (is_integer(x)) return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

// Accepts "p", "-p", "p/q" with decimal big-integer parts.
inline Rational rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        return make_rat(num, den);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("rat_from_string: cannot parse '" + s + "'");
    }
}

// value = mantissa / 2^exponent, exponent minimal (mantissa odd or exponent 0)
struct DyadicRational {
    Integer mantissa;
    unsigned long exponent = 0;

    DyadicRational() : mantissa(0) {}
    DyadicRational(Integer m, unsigned long e) : mantissa(std::move(m)), exponent(e) { normalize(); }

    void normalize() {
        if (mantissa == 0) {
            exponent = 0;
            return;
        }
        unsigned long tz = mpz_scan1(mantissa.get_mpz_t(), 0);
        unsigned long shift = std::min(tz, exponent);
        if (shift > 0) {
            mantissa >>= shift;
            exponent -= shift;
        }
    }

    Rational value() const { return make_rat(mantissa, pow2_int(exponent)); }

    static bool is_dyadic(const Rational& x) {
        const Integer& den = x.get_den();
        if (den == 1) return true;
        // power of two iff exactly one set bit
        return mpz_scan1(den.get_mpz_t(), 0) == mpz_sizeinbase(den.get_mpz_t(), 2) - 1;
    }

    static DyadicRational from_rational(const Rational& x) {
        if (!is_dyadic(x)) throw std::invalid_argument("DyadicRational: value not dyadic");
        unsigned long e = mpz_sizeinbase(x.get_den_mpz_t(), 2) - 1;
        return DyadicRational(x.get_num(), e);
    }
};

// Largest multiple of 2^-e that is <= x.
inline Rational floor_to_dyadic_grid(const Rational& x, unsigned long e) {
    Integer scaled = floor_rat(x * Rational(pow2_int(e)));
    return make_rat(scaled, pow2_int(e));
}

// Smallest multiple of 2^-e that is >= x.
inline Rational ceil_to_dyadic_grid(const Rational& x, unsigned long e) {
    Integer scaled = ceil_rat(x * Rational(pow2_int(e)));
    return make_rat(scaled, pow2_int(e));
}

namespace detail {

// Rows are built once and shared; concurrent readers are fine after insertion.
class BinomialCache {
  public:
    using Row = std::vector<Integer>;

    std::shared_ptr<const Row> row(unsigned n) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = rows_.find(n);
            if (it != rows_.end()) return it->second;
        }
        auto fresh = std::make_shared<Row>(build(n));
        std::lock_guard<std::mutex> lock(mu_);
        auto [it, inserted] = rows_.emplace(n, std::move(fresh));
        (void)inserted;
        return it->second;
    }

    static BinomialCache& instance() {
        static BinomialCache cache;
        return cache;
    }

  private:
    static Row build(unsigned n) {
        Row r(n + 1);
        r[0] = 1;
        for (unsigned k = 1; k <= n; ++k) {
            // C(n,k) = C(n,k-1) * (n-k+1) / k, exact at every step
            r[k] = r[k - 1] * (n - k + 1);
            mpz_divexact_ui(r[k].get_mpz_t(), r[k].get_mpz_t(), k);
        }
        return r;
    }

    std::mutex mu_;
    std::map<unsigned, std::shared_ptr<const Row>> rows_;
};

}  // namespace detail

inline std::shared_ptr<const std::vector<Integer>> binomial_row(unsigned n) {
    return detail::BinomialCache::instance().row(n);
}

inline Integer binomial(unsigned n, unsigned k) {
    if (k > n) return Integer(0);
    return (*binomial_row(n))[k];
}

inline Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rat_max(const Rational& a, const Rational& b) { return a > b ? a : b; }
inline Rational rat_abs(const Rational& a) { return a < 0 ? Rational(-a) : a; }

}  // namespace coinsim

#endif
