#ifndef COINSIM_COUNTEREXAMPLE_HPP
#define COINSIM_COUNTEREXAMPLE_HPP

// Executable refutation of the claimed converse for Bernstein-nonnegative
// approximation: theta-function targets f built from shifted Gaussian
// mixtures are approximable at rate n^(-alpha/2) by polynomials in the
// nonnegative cone on [-1,1], while the Hölder-alpha quotients at the
// designed probe pairs diverge.
//
// The schedule h_m solves e^(-pi/h_m^2) / (log2 m)^2 = m^(-alpha/2), which
// admits solutions with h_m < 1 only for very large m (for alpha = 1/2 the
// first scheduled m is 2^67). Everything tied to the schedule therefore runs
// in log-domain arithmetic on certified series bounds; the polynomial and
// cone machinery is exercised exactly at desk scale where degrees are
// materializable.

#include "bernstein.hpp"
#include "poly.hpp"
#include "rational.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace coinsim {

struct empty_construction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------- exact polynomials

// Taylor polynomial of e^(-x^2) of degree 2n: sum_{k<=n} (-1)^k x^(2k) / k!
inline Poly taylor_exp_neg_sq(unsigned n) {
    std::vector<Rational> c(2 * n + 1, Rational(0));
    Integer fact(1);
    for (unsigned k = 0; k <= n; ++k) {
        if (k > 0) fact *= k;
        c[2 * k] = make_rat(Integer(k % 2 == 0 ? 1 : -1), fact);
    }
    return Poly(std::move(c));
}

// P_{2K}(sqrt(n)(x - t)) expanded exactly; only even powers of the argument
// appear, so sqrt(n) never leaves the rationals.
inline Poly scaled_shifted_taylor(unsigned K, unsigned long n, const Rational& t) {
    Poly acc;
    Integer fact(1);
    Rational neg_n(-static_cast<long>(n));
    Rational coeff(1);
    for (unsigned k = 0; k <= K; ++k) {
        if (k > 0) {
            fact *= k;
            coeff = pow_rat(neg_n, static_cast<long>(k)) / Rational(fact);
        }
        acc = acc + shifted_power(-t, 2 * k) * coeff;
    }
    return acc;
}

// ------------------------------------------------------------- cone B+[a,b]

// Coefficients c_k of p(x) = sum_k c_k (x-a)^k (b-x)^(deg-k); membership in
// the cone means all c_k >= 0.
inline std::vector<Rational> cone_coefficients(const Poly& p, unsigned degree, const Rational& a,
                                               const Rational& b) {
    if (p.degree() > static_cast<int>(degree))
        throw std::invalid_argument("cone_coefficients: degree too small");
    // substitute x = a + (b-a) u and read normalized Bernstein coefficients
    Poly in_u = compose_affine(p, a, b - a);
    BernsteinPoly bern = from_monomial(in_u, degree);
    Rational scale = pow_rat(b - a, static_cast<long>(degree));
    auto row = binomial_row(degree);
    std::vector<Rational> c(degree + 1);
    for (unsigned k = 0; k <= degree; ++k)
        c[k] = bern.coeffs[k] * Rational((*row)[k]) / scale;
    return c;
}

inline bool in_positive_cone(const Poly& p, unsigned degree, const Rational& a, const Rational& b) {
    for (const auto& c : cone_coefficients(p, degree, a, b))
        if (c < 0) return false;
    return true;
}

// point masses (position, weight) restricted to [-2,2], convolved with the
// scaled Taylor polynomial: p_n = nu|_[-2,2] * P_{200 n}(sqrt(n) .)
inline Poly convolution_approximant(const std::vector<std::pair<Rational, Rational>>& masses,
                                    unsigned long n) {
    Poly acc;
    for (const auto& [pos, w] : masses) {
        if (pos < -2 || pos > 2) continue;
        acc = acc + scaled_shifted_taylor(static_cast<unsigned>(100 * n), n, pos) * w;
    }
    return acc;
}

// --------------------------------------------------------- theta functions

// theta(h, t) = sum_k exp(-pi h^2 (k - t)^2); f_{h,m}(x) = h theta(h, x sqrt(m)/h)
inline long double theta_value(long double h, long double t) {
    // summing |k - t| out to where exp(-pi h^2 (k-t)^2) < 1e-22
    long double tail = std::sqrt(51.0L) / (std::sqrt(3.14159265358979323846L) * h) + 2.0L;
    long long klo = static_cast<long long>(std::floor(t - tail));
    long long khi = static_cast<long long>(std::ceil(t + tail));
    long double pi = 3.14159265358979323846264338327950288L;
    long double acc = 0;
    for (long long k = klo; k <= khi; ++k) {
        long double d = static_cast<long double>(k) - t;
        acc += std::exp(-pi * h * h * d * d);
    }
    return acc;
}

struct ThetaEval {
    long double spatial = 0;
    long double fourier = 0;
};

// f_{h,m}(x) evaluated through both representations (Poisson summation)
inline ThetaEval theta_target(long double h, unsigned long m, long double x) {
    if (!(h > 0 && h < 1)) throw std::domain_error("theta_target: h must be in (0,1)");
    if (m == 0) throw std::domain_error("theta_target: m must be positive");
    long double pi = 3.14159265358979323846264338327950288L;
    long double t = x * std::sqrt(static_cast<long double>(m)) / h;
    ThetaEval out;
    out.spatial = h * theta_value(h, t);
    long double acc = 1;
    for (long long l = 1;; ++l) {
        long double term = std::exp(-pi * l * l / (h * h));
        if (term < 1e-30L) break;
        acc += 2 * term * std::cos(2 * pi * l * t);
    }
    out.fourier = acc;
    return out;
}

// ---------------------------------------------------------------- schedule

struct ScheduleEntry {
    unsigned j = 0;        // m = 2^j
    double h = 0;          // solves exp(-pi/h^2) = m^(-alpha/2) (log2 m)^2
    double weight = 0;     // (log2 m)^-2
    double log_probe = 0;  // ln( h / (2 sqrt(m)) )
};

struct Counterexample {
    Rational alpha;  // in (0,1)
    unsigned j0 = 0;
    std::vector<ScheduleEntry> schedule;
};

inline double schedule_denominator(double alpha, unsigned j) {
    return 0.5 * alpha * j * std::log(2.0) - 2.0 * std::log(static_cast<double>(j));
}

// smallest exponent j >= 2 with h_m real and below 1
inline unsigned first_schedule_exponent(const Rational& alpha) {
    double a = alpha.get_d();
    const double pi = 3.14159265358979323846;
    for (unsigned j = 2; j < 100000000; ++j)
        if (schedule_denominator(a, j) > pi) return j;
    throw std::invalid_argument("first_schedule_exponent: alpha too small");
}

inline Counterexample build_counterexample(const Rational& alpha, unsigned m_max_log2) {
    if (alpha <= 0 || alpha >= 1)
        throw std::invalid_argument("build_counterexample: alpha must lie in (0,1)");
    Counterexample ce;
    ce.alpha = alpha;
    ce.j0 = first_schedule_exponent(alpha);
    if (m_max_log2 < ce.j0)
        throw empty_construction_error(
            "build_counterexample: no scheduled m up to 2^" + std::to_string(m_max_log2) +
            "; the schedule equation first admits h_m < 1 at m = 2^" + std::to_string(ce.j0));
    double a = alpha.get_d();
    const double pi = 3.14159265358979323846;
    for (unsigned j = ce.j0; j <= m_max_log2; ++j) {
        ScheduleEntry e;
        e.j = j;
        e.h = std::sqrt(pi / schedule_denominator(a, j));
        e.weight = 1.0 / (static_cast<double>(j) * j);
        e.log_probe = std::log(e.h) - std::log(2.0) - 0.5 * j * std::log(2.0);
        ce.schedule.push_back(e);
    }
    return ce;
}

// ---------------------------------------------------------------- reports

// ln( f_m(0) - f_m(probe) ) for the diagonal component: the Fourier series
// gives 2 sum_{l odd in Z} exp(-pi l^2/h^2) = 4 sum_{l >= 1 odd} exp(-pi l^2/h^2)
inline double log_odd_theta_tail(double h) {
    const double pi = 3.14159265358979323846;
    double lead = -pi / (h * h);
    double corr = 0;
    for (int l = 3; l <= 9; l += 2) corr += std::exp(-pi * (l * l - 1.0) / (h * h));
    return std::log(4.0) + lead + std::log1p(corr);
}

// ln( 2 sum_{l >= 1} exp(-pi l^2 / h^2) ) = ln |f_{h,m}(0) - 1|
inline double log_full_theta_tail(double h) {
    const double pi = 3.14159265358979323846;
    double lead = -pi / (h * h);
    double corr = 0;
    for (int l = 2; l <= 9; ++l) corr += std::exp(-pi * (l * l - 1.0) / (h * h));
    return std::log(2.0) + lead + std::log1p(corr);
}

struct RateRow {
    unsigned j = 0;           // n = 2^j
    double log2_sup_bound = 0;  // certified global bound on sup |f - p_n|
    double scaled_sup = 0;      // n^(alpha/2) * bound
    double log2_err_at_0 = 0;   // exact pointwise error at x = 0
    double scaled_at_0 = 0;     // n^(alpha/2) * pointwise error
};

// |f - g_n| <= sum_{m > n} w_m |f_m - 1| with |f_m - 1| = 2 sum_l exp(-pi l^2/h^2)
// exactly at x = 0 and <= 4 exp(-pi/h^2) = 4 m^(-alpha/2) / w_m globally; the
// polynomial step g_n -> p_n adds 3 e^(-pi n) ||g||, far below everything else.
inline std::vector<RateRow> rate_sweep(const Counterexample& ce, unsigned j_from, unsigned j_to) {
    std::vector<RateRow> rows;
    double a = ce.alpha.get_d();
    const double ln2 = std::log(2.0);
    for (unsigned j = j_from; j <= j_to; ++j) {
        RateRow row;
        row.j = j;
        // global certified bound: 4 sum_{j' > j} 2^(-j' alpha/2)
        double logsum = -1e300;
        double log0 = -1e300;
        for (const auto& e : ce.schedule) {
            if (e.j <= j) continue;
            double lg = std::log(4.0) - 0.5 * a * e.j * ln2;
            logsum = logsum > lg ? logsum + std::log1p(std::exp(lg - logsum))
                                 : lg + std::log1p(std::exp(logsum - lg));
            double l0 = std::log(e.weight) + log_full_theta_tail(e.h);
            log0 = log0 > l0 ? log0 + std::log1p(std::exp(l0 - log0))
                             : l0 + std::log1p(std::exp(log0 - l0));
        }
        row.log2_sup_bound = logsum / ln2;
        row.scaled_sup = std::exp(logsum + 0.5 * a * j * ln2);
        row.log2_err_at_0 = log0 / ln2;
        row.scaled_at_0 = std::exp(log0 + 0.5 * a * j * ln2);
        rows.push_back(row);
    }
    return rows;
}

struct ProbeRow {
    unsigned j = 0;
    double h = 0;
    double log_quotient = 0;  // ln of the certified lower bound on the probe quotient
    double closed_form = 0;   // ln( 2^(2+alpha) h^-alpha ), the closed-form constant
};

// Hölder quotient lower bounds at the designed probe pairs (0, h_m/(2 sqrt m)):
// every mixture component attains its maximum at 0, so the diagonal term
// alone lower-bounds f(0) - f(probe_m).
inline std::vector<ProbeRow> divergence_report(const Counterexample& ce) {
    std::vector<ProbeRow> rows;
    double a = ce.alpha.get_d();
    for (const auto& e : ce.schedule) {
        ProbeRow row;
        row.j = e.j;
        row.h = e.h;
        row.log_quotient = std::log(e.weight) + log_odd_theta_tail(e.h) - a * e.log_probe;
        row.closed_form = (2.0 + a) * std::log(2.0) - a * std::log(e.h);
        rows.push_back(row);
    }
    return rows;
}

// The x(1-x)-multiplied variant: with f~ = x(1-x) f and p~_n = x(1-x) p_n,
// |f~ - p~_n| <= x(1-x) r_n is bounded by const Delta_n(x)^alpha pointwise.
// Returns the sup over a grid of x(1-x) r_n / Delta_n(x)^alpha for n = 2^j.
inline double tilde_ratio_max(const Counterexample& ce, unsigned j, int grid = 512) {
    double a = ce.alpha.get_d();
    const double ln2 = std::log(2.0);
    double logsum = -1e300;
    for (const auto& e : ce.schedule) {
        if (e.j <= j) continue;
        double lg = std::log(4.0) - 0.5 * a * e.j * ln2;
        logsum = logsum > lg ? logsum + std::log1p(std::exp(lg - logsum))
                             : lg + std::log1p(std::exp(logsum - lg));
    }
    double worst = 0;
    for (int i = 1; i < grid; ++i) {
        double x = static_cast<double>(i) / grid;
        double s = x * (1.0 - x);
        double log_dn = std::max(0.5 * std::log(s) - 0.5 * j * ln2, -static_cast<double>(j) * ln2);
        double ratio = std::exp(std::log(s) + logsum - a * log_dn);
        worst = std::max(worst, ratio);
    }
    return worst;
}

// Negative control: the same probe geometry applied to a smooth function.
// Returns ln of the quotient per probe; beyond double resolution the direct
// difference is replaced by the Lipschitz bound |f(0)-f(probe)| <= L probe.
inline std::vector<double> control_quotients(const std::function<double(double)>& f,
                                             double lipschitz, double alpha,
                                             const std::vector<double>& log_probes) {
    std::vector<double> out;
    for (double lp : log_probes) {
        if (lp > std::log(1e-12)) {
            long double probe = std::exp(static_cast<long double>(lp));
            long double diff = std::abs(static_cast<long double>(f(0.0)) -
                                        static_cast<long double>(f(static_cast<double>(probe))));
            out.push_back(static_cast<double>(std::log(diff)) - alpha * lp);
        } else {
            out.push_back(std::log(lipschitz) + (1.0 - alpha) * lp);
        }
    }
    return out;
}

}  // namespace coinsim

#endif
