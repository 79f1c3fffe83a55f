#ifndef COINSIM_ENVELOPE_HPP
#define COINSIM_ENVELOPE_HPP

// The iterative envelope construction: f_n along the b-adic ladder,
// phi-corrections forming the lower/upper pair (g_n, h_n), fill-in of
// intermediate degrees by elevation, dyadic rounding, and exact
// certification of the envelope conditions
//   (i)    0 <= a(n,k) <= b(n,k) <= 1
//   (ii')  C(n,k) a(n,k), C(n,k) b(n,k) are integer multiples of 2^-n
//   (iii)  g_n <= f <= h_n
//   (iv)   g_m <= g_n and h_m >= h_n in the degree-n coefficient order
// Soundness comes from certification, not from pre-derived constants: the
// knobs (theta, D, n0) are searched until the certifier accepts, and every
// accepted ladder is certified exactly in rational arithmetic.

#include "bernstein.hpp"
#include "interval.hpp"
#include "lorentz.hpp"
#include "rational.hpp"
#include "target.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coinsim {

struct LadderParams {
    unsigned n0 = 16;  // base rung
    unsigned b = 4;    // ladder ratio, a power of 2
    Rational alpha;    // positive non-integer
    Rational theta = Rational(1);
    Rational D = Rational(1);
    Rational gamma = make_rat(1, 10);
    Rational delta = make_rat(1, 8);
    unsigned max_level = 2;  // rungs n0 * b^m for m = 0..max_level
    unsigned retry_budget = 8;

    unsigned r() const { return holder_r(alpha); }

    std::vector<unsigned> levels() const {
        std::vector<unsigned> out;
        unsigned n = n0;
        for (unsigned m = 0; m <= max_level; ++m, n *= b) out.push_back(n);
        return out;
    }
};

inline void validate(const LadderParams& p) {
    holder_r(p.alpha);  // throws on integer alpha
    if (p.n0 == 0) throw std::invalid_argument("LadderParams: n0 must be positive");
    if (p.b < 2 || (p.b & (p.b - 1)) != 0)
        throw std::invalid_argument("LadderParams: b must be a power of 2, at least 2");
    if (p.theta < 1) throw std::invalid_argument("LadderParams: theta must be >= 1");
    if (p.D <= 0) throw std::invalid_argument("LadderParams: D must be positive");
    if (p.delta <= 0) throw std::invalid_argument("LadderParams: delta must be positive");
    // gamma < 2^(alpha/2) - 1  <=>  (1+gamma)^(2q) < 2^a for alpha = a/q
    unsigned long a = p.alpha.get_num().get_ui();
    unsigned long q = p.alpha.get_den().get_ui();
    if (p.gamma < 0 || pow_rat(1 + p.gamma, static_cast<long>(2 * q)) >= Rational(pow2_int(a)))
        throw std::invalid_argument("LadderParams: gamma must satisfy gamma < 2^(alpha/2) - 1");
}

enum class Provenance { Raw, FilledIn, Dyadic };

struct EnvelopePair {
    unsigned level = 0;   // ladder value n
    unsigned degree = 0;  // Bernstein degree of the stored coefficients
    std::vector<Rational> lower, upper;
    Provenance provenance = Provenance::Raw;
};

inline Rational pair_gap_at(const EnvelopePair& e, const Rational& x) {
    BernsteinPoly g(e.degree, e.lower), h(e.degree, e.upper);
    return eval(h, x) - eval(g, x);
}

struct range_violation_error : std::runtime_error {
    unsigned level;
    unsigned k;
    range_violation_error(unsigned lvl, unsigned kk, const std::string& what)
        : std::runtime_error(what), level(lvl), k(kk) {}
};

struct construction_error : std::runtime_error {
    std::string condition;
    unsigned level;
    long index;
    construction_error(std::string cond, unsigned lvl, long idx, const std::string& what)
        : std::runtime_error(what), condition(std::move(cond)), level(lvl), index(idx) {}
};

struct invalid_series_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PhiSide { Lower, Upper };

// phi_n(x) = theta/n^alpha + [x(1-x)/n]^(alpha/2) sampled at k/n into a
// degree-n Bernstein polynomial, with a directed enclosure per side.
inline BernsteinPoly phi_poly(unsigned n, const LadderParams& p, PhiSide side,
                              unsigned long prec_bits = 0) {
    if (n == 0) throw std::invalid_argument("phi_poly: n must be positive");
    if (prec_bits == 0) prec_bits = n + p.r() + 8;
    unsigned long a = p.alpha.get_num().get_ui();
    unsigned long q = p.alpha.get_den().get_ui();

    RatInterval n_alpha = rational_power_enclosure(Rational(static_cast<long>(n)), a, q, prec_bits);
    RatInterval theta_term = reciprocal_enclosure(n_alpha) * p.theta;

    Rational n3 = pow_rat(Rational(static_cast<long>(n)), 3);
    std::vector<Rational> coeffs(n + 1);
    for (unsigned k = 0; k <= n / 2; ++k) {
        Rational v = make_rat(Integer(static_cast<long>(k)) * Integer(static_cast<long>(n - k)),
                              Integer(1)) /
                     n3;
        RatInterval ups = rational_power_enclosure(v, a, 2 * q, prec_bits);
        RatInterval total = theta_term + ups;
        coeffs[k] = side == PhiSide::Lower ? total.lo : total.hi;
        coeffs[n - k] = coeffs[k];  // x(1-x) symmetric in k <-> n-k
    }
    return BernsteinPoly(n, std::move(coeffs));
}

// Exact certified verdict of (B_n phi_n) >=_{2n} (1+gamma) (B_{2n} phi_{2n}):
// the left side is taken with lower enclosures, the right with upper, so a
// "true" answer is sound; an undecidable margin raises precision_error.
inline bool domination_check(unsigned n, const LadderParams& p) {
    unsigned long prec = 2 * n + 16;
    for (int attempt = 0; attempt < 3; ++attempt) {
        BernsteinPoly lhs = phi_poly(n, p, PhiSide::Lower, prec);
        BernsteinPoly rhs = phi_poly(2 * n, p, PhiSide::Upper, prec);
        BernsteinPoly lhs_up = phi_poly(n, p, PhiSide::Upper, prec);
        BernsteinPoly rhs_dn = phi_poly(2 * n, p, PhiSide::Lower, prec);
        BernsteinPoly lifted = elevate(lhs, 2 * n);
        BernsteinPoly lifted_up = elevate(lhs_up, 2 * n);
        bool certified_true = true, certified_false = false;
        for (unsigned k = 0; k <= 2 * n; ++k) {
            if (lifted.coeffs[k] < (1 + p.gamma) * rhs.coeffs[k]) certified_true = false;
            if (lifted_up.coeffs[k] < (1 + p.gamma) * rhs_dn.coeffs[k]) certified_false = true;
        }
        if (certified_true) return true;
        if (certified_false) return false;
        prec *= 2;
    }
    throw precision_error("domination_check: enclosures too wide to decide");
}

// f_{n0} = Q_{n0,r} f, then f_n = f_{n/b} + Q_{n,r}(f - f_{n/b}); the
// operator output is snapped to the dyadic grid 2^-(degree+16) so every
// f_n is a concrete rational polynomial even for transcendental targets.
inline std::vector<BernsteinPoly> build_fn_ladder(const TargetFunction& f, const LadderParams& p) {
    validate(p);
    unsigned r = p.r();
    if (r > f.oracle.max_order)
        throw std::invalid_argument("build_fn_ladder: target oracle order below floor(alpha)");
    std::vector<BernsteinPoly> fn;
    for (unsigned n : p.levels()) {
        unsigned degree = n + r;
        try {
            if (fn.empty()) {
                IntervalBernstein q0 = lorentz_apply_enclosure(f.oracle, n, r, degree + 16);
                fn.push_back(q0.snap(degree + 16));
            } else {
                const BernsteinPoly& prev = fn.back();
                DerivativeOracle diff = oracle_minus_bernstein(f.oracle, prev, r);
                IntervalBernstein qd = lorentz_apply_enclosure(diff, n, r, degree + 16);
                fn.push_back(add(elevate(prev, degree), qd.snap(degree + 16)));
            }
        } catch (const precision_error& e) {
            throw precision_error("build_fn_ladder: rung " + std::to_string(n) + ": " + e.what());
        }
    }
    return fn;
}

// sup over a uniform grid of |f - f_n|; f_n is evaluated exactly in the
// Bernstein form (a monomial detour cancels catastrophically at high degree)
inline double fn_grid_residual(const TargetFunction& f, const BernsteinPoly& fn, int grid = 512) {
    ScaledUnits s = make_scaled(fn);
    double sup = 0;
    for (int i = 0; i <= grid; ++i) {
        Rational x = make_rat(i, grid);
        double fx = f.oracle(0, x, 64).mid().get_d();
        sup = std::max(sup, std::abs(fx - eval_scaled(s, x).get_d()));
    }
    return sup;
}

// g_n = f_n - D [x+(1-x)]^r B_n phi_n (lower enclosure),
// h_n = f_n + D [x+(1-x)]^r B_n phi_n (upper enclosure).
inline std::vector<EnvelopePair> assemble_envelopes(const std::vector<BernsteinPoly>& fn,
                                                    const LadderParams& p) {
    unsigned r = p.r();
    std::vector<EnvelopePair> rungs;
    auto levels = p.levels();
    for (std::size_t m = 0; m < levels.size(); ++m) {
        unsigned n = levels[m];
        unsigned degree = n + r;
        BernsteinPoly lo_corr = elevate(phi_poly(n, p, PhiSide::Lower), degree);
        BernsteinPoly up_corr = elevate(phi_poly(n, p, PhiSide::Upper), degree);
        EnvelopePair e;
        e.level = n;
        e.degree = degree;
        e.provenance = Provenance::Raw;
        e.lower.resize(degree + 1);
        e.upper.resize(degree + 1);
        for (unsigned k = 0; k <= degree; ++k) {
            e.lower[k] = fn[m].coeffs[k] - p.D * lo_corr.coeffs[k];
            e.upper[k] = fn[m].coeffs[k] + p.D * up_corr.coeffs[k];
        }
        rungs.push_back(std::move(e));
    }
    return rungs;
}

// Directed rounding onto the 2^-degree grid of C(n,k)-scaled coefficients,
// with a consistency slack subtracted/added first so that condition (iv)
// survives rounding. Default slack is 2^(2-degree).
inline EnvelopePair round_dyadic(const EnvelopePair& e,
                                 std::optional<Rational> slack_override = std::nullopt) {
    Rational slack =
        slack_override ? *slack_override : pow2_rat(2 - static_cast<long>(e.degree));
    EnvelopePair out;
    out.level = e.level;
    out.degree = e.degree;
    out.provenance = Provenance::Dyadic;
    out.lower.resize(e.degree + 1);
    out.upper.resize(e.degree + 1);
    for (unsigned k = 0; k <= e.degree; ++k) {
        if (e.lower[k] < 0 || e.lower[k] > e.upper[k] || e.upper[k] > 1)
            throw range_violation_error(e.level, k, "round_dyadic: input outside [0,1] ordering");
        DyadicCoeff down = round_coeff_down(e.lower[k], k, e.degree, e.degree, slack);
        DyadicCoeff up = round_coeff_up(e.upper[k], k, e.degree, e.degree, slack);
        if (down.mantissa < 0)
            throw range_violation_error(e.level, k, "round_dyadic: lower coefficient fell below 0");
        if (up.value > 1)
            throw range_violation_error(e.level, k, "round_dyadic: upper coefficient exceeded 1");
        out.lower[k] = down.value;
        out.upper[k] = up.value;
    }
    return out;
}

struct Violation {
    std::string condition;  // "i", "ii'", "iii", "iv", "fn-range"
    unsigned level = 0;
    long index = -1;  // coefficient or grid index
    std::string detail;
};

struct CertificationReport {
    bool ok = false;
    bool cond_i = false, cond_ii = false, cond_iii = false, cond_iv = false;
    std::string iii_method;  // "exact", "grid", "exact+grid"
    unsigned grid_points = 0;
    std::vector<Violation> violations;
};

namespace detail {

// mantissa vectors M_k = 2^degree C(degree,k) coeff_k of a dyadic pair
inline std::vector<Integer> dyadic_mantissas(const std::vector<Rational>& coeffs, unsigned degree) {
    Integer scale = pow2_int(degree);
    auto row = binomial_row(degree);
    std::vector<Integer> m(degree + 1);
    for (unsigned k = 0; k <= degree; ++k) {
        Rational v = coeffs[k] * Rational((*row)[k]) * Rational(scale);
        if (!is_integer(v)) throw std::invalid_argument("dyadic_mantissas: coefficient not on grid");
        m[k] = v.get_num();
    }
    return m;
}

inline std::optional<unsigned> first_order_violation(const std::vector<Rational>& small,
                                                     unsigned deg_small,
                                                     const std::vector<Rational>& big,
                                                     unsigned deg_big, bool small_below_big) {
    ScaledUnits ss = make_scaled(BernsteinPoly(deg_small, small));
    ScaledUnits sb = make_scaled(BernsteinPoly(deg_big, big));
    std::vector<Integer> lifted = elevate_units(ss.units, deg_small, deg_big);
    for (unsigned k = 0; k <= deg_big; ++k) {
        bool ok = small_below_big ? sb.units[k] * ss.denom >= lifted[k] * sb.denom
                                  : sb.units[k] * ss.denom <= lifted[k] * sb.denom;
        if (!ok) return k;
    }
    return std::nullopt;
}

}  // namespace detail

// Conditions (i), (ii'), (iv) by exact coefficient inspection; (iii) by the
// exact order certificate when the target is itself polynomial, and on a
// rational grid against oracle enclosures otherwise.
inline CertificationReport certify(const std::vector<EnvelopePair>& rungs,
                                   const TargetFunction& target, unsigned grid_points = 1024,
                                   unsigned long oracle_prec = 96) {
    CertificationReport rep;
    rep.grid_points = grid_points;
    rep.cond_i = rep.cond_ii = rep.cond_iii = rep.cond_iv = true;

    for (const auto& e : rungs) {
        for (unsigned k = 0; k <= e.degree; ++k) {
            if (!(0 <= e.lower[k] && e.lower[k] <= e.upper[k] && e.upper[k] <= 1)) {
                rep.cond_i = false;
                rep.violations.push_back({"i", e.level, static_cast<long>(k), "coefficient ordering"});
            }
        }
        if (e.provenance == Provenance::Dyadic) {
            Integer scale = pow2_int(e.degree);
            auto row = binomial_row(e.degree);
            for (unsigned k = 0; k <= e.degree; ++k) {
                Rational la = e.lower[k] * Rational((*row)[k]) * Rational(scale);
                Rational lb = e.upper[k] * Rational((*row)[k]) * Rational(scale);
                if (!is_integer(la) || !is_integer(lb)) {
                    rep.cond_ii = false;
                    rep.violations.push_back({"ii'", e.level, static_cast<long>(k), "not on 2^-n grid"});
                }
            }
        }
    }

    for (std::size_t m = 0; m + 1 < rungs.size(); ++m) {
        const auto& lo = rungs[m];
        const auto& hi = rungs[m + 1];
        if (auto k = detail::first_order_violation(lo.lower, lo.degree, hi.lower, hi.degree, true)) {
            rep.cond_iv = false;
            rep.violations.push_back({"iv", hi.level, static_cast<long>(*k), "lower envelope not increasing"});
        }
        if (auto k = detail::first_order_violation(lo.upper, lo.degree, hi.upper, hi.degree, false)) {
            rep.cond_iv = false;
            rep.violations.push_back({"iv", hi.level, static_cast<long>(*k), "upper envelope not decreasing"});
        }
    }

    // (iii): always grid-certified against oracle enclosures; for polynomial
    // targets the exact order certificate runs in addition.
    bool exact_all = target.exact_poly &&
                     target.exact_poly->degree() <= static_cast<int>(rungs.front().degree);
    if (exact_all) {
        for (const auto& e : rungs) {
            BernsteinPoly fb = from_monomial(*target.exact_poly, e.degree);
            BernsteinPoly g(e.degree, e.lower), h(e.degree, e.upper);
            if (!(leq_order(g, fb, e.degree) && leq_order(fb, h, e.degree))) {
                exact_all = false;
                break;
            }
        }
    }
    rep.iii_method = exact_all ? "exact+grid" : "grid";
    for (const auto& e : rungs) {
        ScaledUnits g = make_scaled(BernsteinPoly(e.degree, e.lower));
        ScaledUnits h = make_scaled(BernsteinPoly(e.degree, e.upper));
        DirectedValue gv, hv;
        for (unsigned i = 0; i <= grid_points; ++i) {
            Rational x = make_rat(static_cast<long>(i), static_cast<long>(grid_points));
            gv.eval(g, i, grid_points);
            hv.eval(h, i, grid_points);
            unsigned long prec = oracle_prec;
            bool decided = false;
            for (int attempt = 0; attempt < 3 && !decided; ++attempt, prec *= 2) {
                RatInterval fv = target.oracle(0, x, prec);
                if (gv.certainly_leq(fv.lo) && hv.certainly_geq(fv.hi)) decided = true;
                else if (gv.certainly_greater(fv.hi) || hv.certainly_less(fv.lo)) {
                    rep.cond_iii = false;
                    rep.violations.push_back({"iii", e.level, static_cast<long>(i),
                                              "envelope crosses f at grid point"});
                    decided = true;
                }
            }
            if (!decided) {
                rep.cond_iii = false;
                rep.violations.push_back({"iii", e.level, static_cast<long>(i),
                                          "undecidable at maximum oracle precision"});
            }
        }
    }

    rep.ok = rep.cond_i && rep.cond_ii && rep.cond_iii && rep.cond_iv && rep.violations.empty();
    return rep;
}

struct EnvelopeLadder {
    LadderParams params;  // final knob values after the search
    std::string target_id;
    std::vector<BernsteinPoly> fn;
    std::vector<EnvelopePair> raw_rungs;
    std::vector<EnvelopePair> rungs;  // dyadic
    CertificationReport certification;
    unsigned attempts = 0;
};

// Construct-then-certify loop. The classical choice of b, theta, D, n0 goes through
// existential constants that cannot be evaluated directly; here range
// failures shrink D, consistency failures grow D (with a bisection bracket
// once both sides have been seen), a failed phi-domination grows theta, and
// n0 doubles only when the D-corridor is exhausted.
inline EnvelopeLadder build_envelopes(const TargetFunction& target, LadderParams params) {
    validate(params);
    if (params.r() > target.oracle.max_order)
        throw std::invalid_argument("build_envelopes: target oracle order below floor(alpha)");

    std::vector<BernsteinPoly> fn = build_fn_ladder(target, params);
    auto check_fn_range = [&](const std::vector<BernsteinPoly>& ladder) -> bool {
        for (const auto& f : ladder)
            for (const auto& c : f.coeffs)
                if (c < params.delta || c > 1 - params.delta) return false;
        return true;
    };
    if (!check_fn_range(fn))
        throw construction_error("fn-range", params.n0, -1,
                                 "build_envelopes: f_n coefficients escape [delta, 1-delta]");

    Rational D_lo(0);
    std::optional<Rational> D_hi;
    std::optional<Violation> first_violation;
    unsigned theta_escalations = 0;

    for (unsigned attempt = 1; attempt <= params.retry_budget; ++attempt) {
        std::vector<EnvelopePair> raw = assemble_envelopes(fn, params);
        bool range_failed = false;
        Violation failure;
        std::vector<EnvelopePair> dyadic;
        try {
            for (const auto& e : raw) dyadic.push_back(round_dyadic(e));
        } catch (const range_violation_error& rv) {
            range_failed = true;
            failure = {"i", rv.level, static_cast<long>(rv.k), rv.what()};
        }

        if (!range_failed) {
            CertificationReport rep = certify(dyadic, target);
            if (rep.ok) {
                EnvelopeLadder out;
                out.params = params;
                out.target_id = target.id;
                out.fn = fn;
                out.raw_rungs = std::move(raw);
                out.rungs = std::move(dyadic);
                out.certification = std::move(rep);
                out.attempts = attempt;
                return out;
            }
            failure = rep.violations.front();
        }
        if (!first_violation) first_violation = failure;

        if (failure.condition == "i") {
            D_hi = params.D;
        } else if (failure.condition == "iv" || failure.condition == "iii") {
            bool phi_side_failed = false;
            if (failure.condition == "iv" && theta_escalations < 3) {
                try {
                    phi_side_failed = !domination_check(params.n0, params);
                } catch (const precision_error&) {
                    phi_side_failed = false;
                }
            }
            if (phi_side_failed) {
                params.theta *= 2;
                ++theta_escalations;
                D_lo = 0;
                D_hi.reset();
                continue;
            }
            D_lo = params.D;
        } else {
            break;  // unexpected condition; fall through to failure
        }

        if (D_hi && D_lo > 0 && (*D_hi - D_lo) < *D_hi / 16) {
            // empty corridor at this n0; move the base rung up and restart
            params.n0 *= 2;
            fn = build_fn_ladder(target, params);
            if (!check_fn_range(fn)) break;
            D_lo = 0;
            D_hi.reset();
            continue;
        }
        if (D_hi && D_lo > 0)
            params.D = (D_lo + *D_hi) / 2;
        else if (D_hi)
            params.D = *D_hi / 2;
        else
            params.D = D_lo * 2;
    }

    Violation v = first_violation.value_or(Violation{"unknown", params.n0, -1, ""});
    throw construction_error(v.condition, v.level, v.index,
                             "build_envelopes: retry budget exhausted; first violation: (" +
                                 v.condition + ") at level " + std::to_string(v.level));
}

// Envelope at an arbitrary degree: the elevated envelope of the deepest rung
// with degree <= d. Between rungs the pair is a pure elevation, so the gap
// polynomial is unchanged and (iv) holds with equality.
inline EnvelopePair fill_in(const EnvelopeLadder& ladder, unsigned degree) {
    const EnvelopePair* best = nullptr;
    for (const auto& e : ladder.rungs)
        if (e.degree <= degree) best = &e;
    if (!best) throw std::invalid_argument("fill_in: degree below the base rung");
    if (best->degree == degree) return *best;
    EnvelopePair out;
    out.level = best->level;
    out.degree = degree;
    out.provenance = Provenance::FilledIn;
    out.lower = elevate(BernsteinPoly(best->degree, best->lower), degree).coeffs;
    out.upper = elevate(BernsteinPoly(best->degree, best->upper), degree).coeffs;
    return out;
}

// Series representation F_0 = g_{n0}, F_m = g_m - g_{m-1} (elevated); every
// term has nonnegative coefficients exactly when (iv) holds.
struct SeriesForm {
    std::vector<unsigned> levels;
    std::vector<BernsteinPoly> terms;
};

inline SeriesForm to_series(const EnvelopeLadder& ladder) {
    SeriesForm s;
    BernsteinPoly prev;
    bool first = true;
    for (const auto& e : ladder.rungs) {
        BernsteinPoly g(e.degree, e.lower);
        s.terms.push_back(first ? g : sub(g, prev));
        s.levels.push_back(e.level);
        prev = std::move(g);
        first = false;
    }
    return s;
}

inline std::vector<BernsteinPoly> from_series(const SeriesForm& s) {
    std::vector<BernsteinPoly> partial;
    BernsteinPoly acc;
    bool first = true;
    for (const auto& term : s.terms) {
        for (const auto& c : term.coeffs)
            if (c < 0) throw invalid_series_error("from_series: negative coefficient in term");
        acc = first ? term : add(acc, term);
        first = false;
        partial.push_back(acc);
    }
    return partial;
}

}  // namespace coinsim

#endif
