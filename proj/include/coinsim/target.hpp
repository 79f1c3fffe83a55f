#ifndef COINSIM_TARGET_HPP
#define COINSIM_TARGET_HPP

// Catalog of target functions f: [0,1] -> (0,1) with certified derivative
// oracles and smoothness metadata, plus sampled Hölder/Zygmund seminorm
// estimators. The estimators are diagnostics (finite-sample lower bounds);
// they never gate construction.

#include "interval.hpp"
#include "lorentz.hpp"
#include "poly.hpp"
#include "rational.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinsim {

struct TargetFunction {
    std::string id;
    Rational default_alpha;  // positive non-integer
    Rational delta;          // range margin: 2*delta < min f <= max f < 1 - 2*delta
    DerivativeOracle oracle;
    std::optional<Poly> exact_poly;                       // set when f itself is polynomial
    std::function<double(unsigned j, double x)> approx;   // float diagnostics only

    unsigned r() const { return static_cast<unsigned>(floor_rat(default_alpha).get_ui()); }
};

inline unsigned holder_r(const Rational& alpha) {
    if (alpha <= 0 || is_integer(alpha))
        throw std::invalid_argument("alpha must be positive and non-integer");
    return static_cast<unsigned>(floor_rat(alpha).get_ui());
}

// f(p) = offset + c |p - center|^alpha with rational alpha = a/q; derivative
// oracle up to floor(alpha) with enclosures exact at perfect powers.
inline TargetFunction make_power_target(std::string id, const Rational& center,
                                        const Rational& alpha, const Rational& scale,
                                        const Rational& offset, const Rational& delta) {
    unsigned r = holder_r(alpha);
    unsigned long a = alpha.get_num().get_ui();
    unsigned long q = alpha.get_den().get_ui();
    Rational c = scale;
    Rational ctr = center;
    Rational off = offset;

    auto eval = [=](unsigned j, const Rational& x, unsigned long prec) -> RatInterval {
        Rational t = x - ctr;
        int sign = t < 0 ? -1 : 1;
        Rational at = rat_abs(t);
        // falling product alpha (alpha-1) ... (alpha-j+1)
        Rational factor = c;
        for (unsigned i = 0; i < j; ++i) factor *= alpha - Rational(static_cast<long>(i));
        if (sign < 0 && j % 2 == 1) factor = -factor;
        long residual = static_cast<long>(a) - static_cast<long>(j) * static_cast<long>(q);
        // residual > 0 for j <= r since alpha is non-integer
        RatInterval pw = rational_power_enclosure(at, static_cast<unsigned long>(residual), q,
                                                  prec + 4);
        RatInterval out = pw * factor;
        if (j == 0) out = out + off;
        return out;
    };

    double alpha_d = alpha.get_d();
    double c_d = scale.get_d();
    double ctr_d = center.get_d();
    double off_d = offset.get_d();
    auto approx = [=](unsigned j, double x) {
        double t = x - ctr_d;
        double factor = c_d;
        for (unsigned i = 0; i < j; ++i) factor *= alpha_d - i;
        if (t < 0 && j % 2 == 1) factor = -factor;
        double v = factor * std::pow(std::abs(t), alpha_d - j);
        return j == 0 ? v + off_d : v;
    };

    return TargetFunction{std::move(id), alpha, delta, DerivativeOracle{r, eval}, std::nullopt,
                          approx};
}

inline TargetFunction make_poly_target(std::string id, Poly f, const Rational& default_alpha,
                                       const Rational& delta, unsigned max_order = 16) {
    auto derivs = std::make_shared<std::vector<Poly>>();
    derivs->push_back(f);
    for (unsigned j = 1; j <= max_order; ++j) derivs->push_back(derivs->back().derivative());
    auto approx = [derivs, max_order](unsigned j, double x) {
        return j <= max_order ? (*derivs)[j].eval(x) : 0.0;
    };
    DerivativeOracle oracle = oracle_from_poly(f, max_order);
    return TargetFunction{std::move(id), default_alpha, delta, std::move(oracle), std::move(f),
                          approx};
}

// The built-in targets. Range margins are uniform: every entry maps [0,1]
// into [1/4 + eps, 3/4 - eps] or tighter, so delta = 1/8 works throughout.
inline std::vector<TargetFunction> catalog() {
    std::vector<TargetFunction> out;
    Rational delta = make_rat(1, 8);

    out.push_back(make_poly_target("affine", Poly({make_rat(2, 5), make_rat(1, 5)}),
                                   make_rat(3, 2), delta));

    // 1/2 + (p - 1/2)^3
    Poly t({make_rat(-1, 2), Rational(1)});
    Poly cubic = t * t * t + Poly::constant(make_rat(1, 2));
    out.push_back(make_poly_target("cubic", cubic, make_rat(5, 2), delta));

    out.push_back(make_power_target("holder-1/2", make_rat(1, 2), make_rat(1, 2), make_rat(1, 3),
                                    make_rat(1, 2), delta));
    out.push_back(make_power_target("holder-3/2", make_rat(1, 2), make_rat(3, 2), make_rat(2, 3),
                                    make_rat(1, 2), delta));
    out.push_back(make_power_target("holder-5/2", make_rat(1, 2), make_rat(5, 2), Rational(1),
                                    make_rat(1, 2), delta));
    return out;
}

inline TargetFunction find_target(const std::string& id) {
    for (auto& t : catalog())
        if (t.id == id) return t;
    throw std::invalid_argument("find_target: unknown target '" + id + "'");
}

// Per-scale finite-sample sups; estimates are lower bounds of the true
// seminorm and refining the grid never decreases them.
struct SeminormEstimate {
    std::vector<double> scales;
    std::vector<double> values;
};

inline SeminormEstimate holder_seminorm(const TargetFunction& f, const Rational& probe_alpha,
                                        const std::vector<double>& scales, int grid) {
    unsigned r = holder_r(probe_alpha);
    if (r > f.oracle.max_order)
        throw std::invalid_argument("holder_seminorm: oracle order below floor(alpha)");
    double exponent = probe_alpha.get_d() - static_cast<double>(r);
    SeminormEstimate est;
    for (double h : scales) {
        double sup = 0;
        for (int i = 0; i <= grid; ++i) {
            double x = static_cast<double>(i) / grid;
            if (x + h > 1.0) break;
            double q = std::abs(f.approx(r, x + h) - f.approx(r, x)) / std::pow(h, exponent);
            sup = std::max(sup, q);
        }
        est.scales.push_back(h);
        est.values.push_back(sup);
    }
    return est;
}

inline SeminormEstimate zygmund_seminorm(const TargetFunction& f, const std::vector<double>& scales,
                                         int grid, int r_override = -1) {
    unsigned r = r_override >= 0 ? static_cast<unsigned>(r_override) : f.r();
    if (r > f.oracle.max_order)
        throw std::invalid_argument("zygmund_seminorm: oracle order below r");
    SeminormEstimate est;
    for (double t : scales) {
        double sup = 0;
        for (int i = 0; i <= grid; ++i) {
            double x = static_cast<double>(i) / grid;
            if (x - t < 0.0 || x + t > 1.0) continue;
            double d2 = f.approx(r, x + t) - 2.0 * f.approx(r, x) + f.approx(r, x - t);
            sup = std::max(sup, std::abs(d2) / t);
        }
        est.scales.push_back(t);
        est.values.push_back(sup);
    }
    return est;
}

}  // namespace coinsim

#endif
