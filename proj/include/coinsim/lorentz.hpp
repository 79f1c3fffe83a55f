#ifndef COINSIM_LORENTZ_HPP
#define COINSIM_LORENTZ_HPP

// The Lorentz operator machinery: central-moment polynomials T_nj, the
// correction polynomials tau_j, the operator Q_{n,r} mapping derivative
// samples at k/n to a Bernstein polynomial of degree n+r, and empirical
// boundedness diagnostics.
//
// T_nj and tau_j are kept bivariate in (x, n): tau_j has degree <= j in x and
// <= floor(j/2) in n, and both facts are load-bearing for the coefficient
// estimates, so the symbolic n stays visible.

#include "bernstein.hpp"
#include "interval.hpp"
#include "poly.hpp"
#include "rational.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace coinsim {

namespace detail {

inline Integer factorial(unsigned j) {
    Integer f;
    mpz_fac_ui(f.get_mpz_t(), j);
    return f;
}

template <typename Builder>
class PolyMemo {
  public:
    explicit PolyMemo(Builder b) : build_(std::move(b)) {}

    const Poly2& get(unsigned j) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = memo_.find(j);
        if (it != memo_.end()) return *it->second;
        auto fresh = std::make_unique<Poly2>(build_(j, *this));
        auto [pos, ok] = memo_.emplace(j, std::move(fresh));
        (void)ok;
        return *pos->second;
    }

    // unlocked variant for recursive calls while already holding the lock
    const Poly2& get_recursive(unsigned j) {
        auto it = memo_.find(j);
        if (it != memo_.end()) return *it->second;
        auto fresh = std::make_unique<Poly2>(build_(j, *this));
        auto [pos, ok] = memo_.emplace(j, std::move(fresh));
        (void)ok;
        return *pos->second;
    }

  private:
    Builder build_;
    std::mutex mu_;
    std::map<unsigned, std::unique_ptr<Poly2>> memo_;
};

}  // namespace detail

// T_nj as a polynomial in (x, n), via the central-moment recurrence
// T_{n,j+1} = x(1-x) (T_nj' + n j T_{n,j-1}); the defining sum
// sum_k (k-nx)^j p_nk(x) is the test oracle for this.
inline const Poly2& moment_poly_sym(unsigned j) {
    struct Build {
        Poly2 operator()(unsigned jj, detail::PolyMemo<Build>& memo) const {
            if (jj == 0) return Poly2::constant(Rational(1));
            if (jj == 1) return Poly2::zero();
            const Poly2& prev = memo.get_recursive(jj - 1);
            const Poly2& prev2 = memo.get_recursive(jj - 2);
            Poly2 n_term;
            for (std::size_t i = 0; i < prev2.c.size(); ++i)
                for (std::size_t d = 0; d < prev2.c[i].size(); ++d)
                    if (prev2.c[i][d] != 0)
                        n_term.add_term(i, d + 1, prev2.c[i][d] * Rational(static_cast<long>(jj - 1)));
            return (prev.dx() + n_term).times_x_one_minus_x();
        }
    };
    static detail::PolyMemo<Build> memo{Build{}};
    return memo.get(j);
}

inline Poly moment_poly(unsigned n, unsigned j) {
    if (n == 0) throw std::invalid_argument("moment_poly: n must be positive");
    return moment_poly_sym(j).eval_n(Rational(static_cast<long>(n)));
}

// tau_j(x,n) = -sum_{l=2}^{j} T_nl(x) tau_{j-l}(x,n) / l!  with tau_0 = 1,
// tau_1 = 0. As functions the tau_j do not depend on the parameter r.
inline const Poly2& tau_poly_sym(unsigned j) {
    struct Build {
        Poly2 operator()(unsigned jj, detail::PolyMemo<Build>& memo) const {
            if (jj == 0) return Poly2::constant(Rational(1));
            if (jj == 1) return Poly2::zero();
            Poly2 acc;
            for (unsigned l = 2; l <= jj; ++l) {
                Poly2 term = moment_poly_sym(l) * memo.get_recursive(jj - l);
                acc = acc + term * make_rat(Integer(-1), detail::factorial(l));
            }
            return acc;
        }
    };
    static detail::PolyMemo<Build> memo{Build{}};
    return memo.get(j);
}

inline Poly tau_poly(unsigned j, unsigned n) {
    if (n == 0) throw std::invalid_argument("tau_poly: n must be positive");
    return tau_poly_sym(j).eval_n(Rational(static_cast<long>(n)));
}

// Coefficients a_i(n,j) of tau_j(x,n) = sum_i a_i x^i (1-x)^(j-i); the
// unnormalized degree-j form whose symmetry |a_i| = |a_{j-i}| is exact.
inline std::vector<Rational> tau_unnormalized_coeffs(unsigned j, unsigned n) {
    Poly t = tau_poly(j, n);
    std::vector<Rational> a(j + 1, Rational(0));
    for (unsigned i = 0; i <= j; ++i) {
        Rational acc(0);
        for (unsigned l = 0; l <= i && l < t.c.size(); ++l)
            acc += t.c[l] * Rational(binomial(j - l, i - l));
        a[i] = acc;
    }
    return a;
}

// tau_j at numeric n, written in the normalized Bernstein basis of degree r.
inline BernsteinPoly tau_bernstein(unsigned j, unsigned n, unsigned r) {
    if (j > r) throw std::invalid_argument("tau_bernstein: j exceeds embedding degree");
    return from_monomial(tau_poly(j, n), r);
}

// Per-derivative-order samples with certified enclosures.
struct DerivativeOracle {
    unsigned max_order = 0;
    std::function<RatInterval(unsigned j, const Rational& x, unsigned long prec_bits)> eval;

    RatInterval operator()(unsigned j, const Rational& x, unsigned long prec_bits) const {
        if (j > max_order) throw std::invalid_argument("DerivativeOracle: order beyond support");
        return eval(j, x, prec_bits);
    }
};

inline DerivativeOracle oracle_from_poly(const Poly& p, unsigned max_order = 64) {
    auto derivs = std::make_shared<std::vector<Poly>>();
    derivs->push_back(p);
    for (unsigned j = 1; j <= max_order; ++j) derivs->push_back(derivs->back().derivative());
    return DerivativeOracle{
        max_order, [derivs](unsigned j, const Rational& x, unsigned long) {
            return RatInterval::point((*derivs)[j].eval(x));
        }};
}

// f minus a stored Bernstein polynomial, with the polynomial side exact.
inline DerivativeOracle oracle_minus_bernstein(const DerivativeOracle& f, const BernsteinPoly& g,
                                               unsigned max_order) {
    auto derivs = std::make_shared<std::vector<ScaledUnits>>();
    BernsteinPoly cur = g;
    for (unsigned j = 0; j <= max_order; ++j) {
        derivs->push_back(make_scaled(cur));
        cur = derivative(cur);
    }
    DerivativeOracle base = f;
    return DerivativeOracle{max_order,
                            [base, derivs](unsigned j, const Rational& x, unsigned long prec) {
                                RatInterval fv = base(j, x, prec);
                                Rational gv = eval_scaled((*derivs)[j], x);
                                return RatInterval(fv.lo - gv, fv.hi - gv);
                            }};
}

// Lower/upper Bernstein polynomials of the same degree enclosing a result
// whose coefficients were computed as intervals.
struct IntervalBernstein {
    BernsteinPoly lower, upper;

    Rational max_width() const {
        Rational w(0);
        for (unsigned k = 0; k <= lower.degree; ++k)
            w = rat_max(w, upper.coeffs[k] - lower.coeffs[k]);
        return w;
    }

    bool is_exact() const { return lower == upper; }

    // midpoint snapped to the dyadic grid 2^-grid_bits; exact results pass through
    BernsteinPoly snap(unsigned long grid_bits) const {
        if (is_exact()) return lower;
        std::vector<Rational> c(lower.degree + 1);
        for (unsigned k = 0; k <= lower.degree; ++k)
            c[k] = floor_to_dyadic_grid((lower.coeffs[k] + upper.coeffs[k]) / 2, grid_bits);
        return BernsteinPoly(lower.degree, std::move(c));
    }
};

namespace detail {

// exact-coefficient polynomial times interval-coefficient polynomial
inline IntervalBernstein mul_exact_interval(const BernsteinPoly& exact, const BernsteinPoly& lo,
                                            const BernsteinPoly& hi) {
    ScaledUnits se = make_scaled(exact);
    ScaledUnits slo = make_scaled(lo);
    ScaledUnits shi = make_scaled(hi);
    // common denominator for the interval side so unit vectors align
    Integer g;
    mpz_gcd(g.get_mpz_t(), slo.denom.get_mpz_t(), shi.denom.get_mpz_t());
    Integer common = slo.denom / g * shi.denom;
    Integer flo = common / slo.denom, fhi = common / shi.denom;
    unsigned n = exact.degree + lo.degree;
    std::vector<Integer> conv_lo(n + 1, Integer(0)), conv_hi(n + 1, Integer(0));
    for (unsigned i = 0; i <= exact.degree; ++i) {
        const Integer& e = se.units[i];
        if (e == 0) continue;
        bool pos = e > 0;
        for (unsigned j = 0; j <= lo.degree; ++j) {
            const Integer& a = slo.units[j];
            const Integer& b = shi.units[j];
            if (pos) {
                conv_lo[i + j] += e * (a * flo);
                conv_hi[i + j] += e * (b * fhi);
            } else {
                conv_lo[i + j] += e * (b * fhi);
                conv_hi[i + j] += e * (a * flo);
            }
        }
    }
    auto row = binomial_row(n);
    Integer denom = se.denom * common;
    std::vector<Rational> clo(n + 1), chi(n + 1);
    for (unsigned k = 0; k <= n; ++k) {
        clo[k] = make_rat(conv_lo[k], denom * (*row)[k]);
        chi[k] = make_rat(conv_hi[k], denom * (*row)[k]);
    }
    return {BernsteinPoly(n, std::move(clo)), BernsteinPoly(n, std::move(chi))};
}

}  // namespace detail

// (Q_{n,r} f)(x) = sum_k ( sum_j f^(j)(k/n) n^-j tau_j(x,n) ) p_nk(x), exact
// when the oracle is exact; otherwise directed interval coefficients of the
// requested width.
inline IntervalBernstein lorentz_apply_enclosure(const DerivativeOracle& f, unsigned n, unsigned r,
                                                 unsigned long out_prec_bits = 64) {
    if (n == 0) throw std::invalid_argument("lorentz_apply: n must be positive");
    if (f.max_order < r) throw std::invalid_argument("lorentz_apply: oracle order below r");

    unsigned long prec = out_prec_bits + 32;
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::vector<Rational> zero(n + r + 1, Rational(0));
        BernsteinPoly acc_lo(n + r, zero), acc_hi(n + r, zero);
        for (unsigned j = 0; j <= r; ++j) {
            BernsteinPoly tau = tau_bernstein(j, n, r);
            bool tau_zero = true;
            for (const auto& c : tau.coeffs) tau_zero = tau_zero && c == 0;
            if (tau_zero) continue;
            std::vector<Rational> smp_lo(n + 1), smp_hi(n + 1);
            for (unsigned k = 0; k <= n; ++k) {
                RatInterval v = f(j, make_rat(static_cast<long>(k), static_cast<long>(n)), prec);
                smp_lo[k] = v.lo;
                smp_hi[k] = v.hi;
            }
            Rational nj = pow_rat(Rational(static_cast<long>(n)), -static_cast<long>(j));
            IntervalBernstein prod = detail::mul_exact_interval(
                scale(tau, nj), BernsteinPoly(n, std::move(smp_lo)), BernsteinPoly(n, std::move(smp_hi)));
            for (unsigned k = 0; k <= n + r; ++k) {
                acc_lo.coeffs[k] += prod.lower.coeffs[k];
                acc_hi.coeffs[k] += prod.upper.coeffs[k];
            }
        }
        IntervalBernstein out{std::move(acc_lo), std::move(acc_hi)};
        if (out.max_width() <= pow2_rat(-static_cast<long>(out_prec_bits))) return out;
        prec += out_prec_bits;
    }
    throw precision_error("lorentz_apply: oracle precision insufficient for requested width");
}

// Exact-path variant; throws if the oracle produced nondegenerate intervals.
inline BernsteinPoly lorentz_apply(const DerivativeOracle& f, unsigned n, unsigned r) {
    IntervalBernstein enc = lorentz_apply_enclosure(f, n, r);
    if (!enc.is_exact())
        throw precision_error("lorentz_apply: exact result requested from inexact oracle");
    return enc.lower;
}

inline double delta_n_double(double x, unsigned n) {
    return std::max(std::sqrt(x * (1.0 - x) / n), 1.0 / n);
}

// Diagnostics for the coefficient and pointwise growth of tau_j across a
// geometric sweep in n. The underlying constants are existential, so callers
// assert bounded ratios across the sweep rather than fixed values.
struct CoefficientBoundRow {
    unsigned j = 0;
    unsigned n = 0;
    double coeff_ratio = 0.0;  // max_i |a_i(n,j)| / n^i
    double sup_ratio = 0.0;    // sup_x |tau_j(x,n)| / (n^j Delta_n(x)^j)
};

inline std::vector<CoefficientBoundRow> coefficient_bound_report(unsigned j_max, unsigned n_lo,
                                                                 unsigned n_hi, int grid = 512) {
    std::vector<CoefficientBoundRow> rows;
    for (unsigned j = 0; j <= j_max; ++j) {
        for (unsigned n = n_lo; n <= n_hi; n *= 2) {
            CoefficientBoundRow row{j, n, 0.0, 0.0};
            auto a = tau_unnormalized_coeffs(j, n);
            for (unsigned i = 0; i <= j; ++i) {
                double v = std::abs(a[i].get_d()) / std::pow(static_cast<double>(n), i);
                row.coeff_ratio = std::max(row.coeff_ratio, v);
            }
            Poly t = tau_poly(j, n);
            for (int i = 0; i <= grid; ++i) {
                double x = static_cast<double>(i) / grid;
                double dn = delta_n_double(x, n);
                double v = std::abs(t.eval(x)) / std::pow(static_cast<double>(n) * dn, j);
                row.sup_ratio = std::max(row.sup_ratio, v);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// Boundedness diagnostics for the simultaneous-approximation behaviour of
// Q_{n,r}: sup over a grid of |(Q_{n,r}f - f)^(j)(x)| / Delta_n(x)^(alpha-j)
// and of |(Q_{n,r}f)^(r+1)(x)| Delta_n(x)^(r+1-alpha). The constants are
// existential, so callers compare ratios across an n sweep rather than
// asserting values.
inline double simultaneous_approx_sup(const DerivativeOracle& f, double alpha, unsigned n,
                                      unsigned r, unsigned j, int grid = 512) {
    IntervalBernstein enc = lorentz_apply_enclosure(f, n, r, 96);
    BernsteinPoly q = derivative(enc.snap(n + r + 64), j);
    ScaledUnits su = make_scaled(q);
    double sup = 0;
    for (int i = 0; i <= grid; ++i) {
        Rational x = make_rat(i, grid);
        double qv = eval_scaled(su, x).get_d();
        double fv = f(j, x, 64).mid().get_d();
        double dn = delta_n_double(x.get_d(), n);
        sup = std::max(sup, std::abs(qv - fv) / std::pow(dn, alpha - j));
    }
    return sup;
}

inline double derivative_bound_sup(const DerivativeOracle& f, double alpha, unsigned n, unsigned r,
                                   int grid = 512) {
    IntervalBernstein enc = lorentz_apply_enclosure(f, n, r, 96);
    BernsteinPoly q = derivative(enc.snap(n + r + 64), r + 1);
    ScaledUnits su = make_scaled(q);
    double sup = 0;
    for (int i = 0; i <= grid; ++i) {
        Rational x = make_rat(i, grid);
        double dn = delta_n_double(x.get_d(), n);
        sup = std::max(sup, std::abs(eval_scaled(su, x).get_d()) *
                                std::pow(dn, r + 1 - alpha));
    }
    return sup;
}

}  // namespace coinsim

#endif
