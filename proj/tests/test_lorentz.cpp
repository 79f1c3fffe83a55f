#include <catch2/catch_amalgamated.hpp>

#include <coinsim/lorentz.hpp>
#include <coinsim/target.hpp>

#include "oracles.hpp"

using namespace coinsim;

TEST_CASE("moment polynomials") {
    SECTION("T_n0 = 1 and T_n1 = 0") {
        for (unsigned n : {1u, 5u, 12u}) {
            CHECK(moment_poly(n, 0) == Poly::constant(Rational(1)));
            CHECK(moment_poly(n, 1).is_zero());
        }
    }
    SECTION("recurrence equals the defining sum") {
        for (unsigned n : {1u, 2u, 5u, 9u, 17u, 30u}) {
            for (unsigned j = 0; j <= 6; ++j) {
                CHECK(moment_poly(n, j) == oracles::moment_poly_direct(n, j));
            }
        }
    }
    SECTION("reflection symmetry T_nj(1-x) = (-1)^j T_nj(x)") {
        for (unsigned n : {4u, 11u}) {
            for (unsigned j = 2; j <= 6; ++j) {
                Poly t = moment_poly(n, j);
                Poly reflected = compose_affine(t, Rational(1), Rational(-1));
                CHECK(reflected == (j % 2 == 0 ? t : t * Rational(-1)));
            }
        }
    }
    SECTION("T_n2 = n x(1-x)") {
        Poly t = moment_poly(7, 2);
        CHECK(t == Poly({Rational(0), Rational(7), Rational(-7)}));
    }
}

TEST_CASE("tau polynomials") {
    SECTION("base cases") {
        for (unsigned n : {1u, 6u}) {
            CHECK(tau_poly(0, n) == Poly::constant(Rational(1)));
            CHECK(tau_poly(1, n).is_zero());
        }
    }
    SECTION("tau_2 = -(1/2) T_n2 = -(n/2) x(1-x)") {
        for (unsigned n : {2u, 9u}) {
            Poly expected = oracles::moment_poly_direct(n, 2) * make_rat(-1, 2);
            CHECK(tau_poly(2, n) == expected);
            Rational half_n = make_rat(static_cast<long>(n), 2);
            CHECK(tau_poly(2, n) == Poly({Rational(0), -half_n, half_n}));
        }
    }
    SECTION("degree bounds with symbolic n, j <= 8") {
        for (unsigned j = 0; j <= 8; ++j) {
            const Poly2& t = tau_poly_sym(j);
            CHECK(t.deg_x() <= static_cast<int>(j));
            CHECK(t.deg_n() <= static_cast<int>(j / 2));
        }
    }
    SECTION("coefficient symmetry |a_i| = |a_{j-i}|, j <= 8") {
        for (unsigned j = 0; j <= 8; ++j) {
            for (unsigned n : {3u, 16u, 100u}) {
                auto a = tau_unnormalized_coeffs(j, n);
                for (unsigned i = 0; i <= j; ++i) CHECK(rat_abs(a[i]) == rat_abs(a[j - i]));
            }
        }
    }
    SECTION("unnormalized form reproduces tau") {
        unsigned j = 5, n = 13;
        auto a = tau_unnormalized_coeffs(j, n);
        Poly rebuilt;
        for (unsigned i = 0; i <= j; ++i) {
            Poly xi = Poly::monomial(i, a[i]);
            Poly one_minus_x({Rational(1), Rational(-1)});
            for (unsigned l = 0; l < j - i; ++l) xi = xi * one_minus_x;
            rebuilt = rebuilt + xi;
        }
        CHECK(rebuilt == tau_poly(j, n));
    }
}

TEST_CASE("lorentz operator") {
    SECTION("r = 0 and r = 1 are the Bernstein operator") {
        Poly f({make_rat(2, 5), make_rat(1, 5)});  // (2+x)/5
        for (unsigned r : {0u, 1u}) {
            for (unsigned n : {4u, 9u}) {
                BernsteinPoly q = lorentz_apply(oracle_from_poly(f), n, r);
                std::vector<Rational> samples;
                for (unsigned k = 0; k <= n; ++k)
                    samples.push_back(f.eval(make_rat(static_cast<long>(k), static_cast<long>(n))));
                BernsteinPoly b = elevate(bernstein_op(samples, n), n + r);
                CHECK(q == b);
            }
        }
    }
    SECTION("reproduces x^2 exactly for r = 2") {
        Poly f = Poly::monomial(2);
        for (unsigned n : {2u, 7u, 18u, 30u}) {
            BernsteinPoly q = lorentz_apply(oracle_from_poly(f), n, 2);
            CHECK(to_monomial(q) == f);
        }
    }
    SECTION("reproduces all monomials of degree <= r") {
        for (unsigned r = 0; r <= 4; ++r) {
            for (unsigned d = 0; d <= r; ++d) {
                Poly f = Poly::monomial(d);
                for (unsigned n : {3u, 10u, 17u, 30u}) {
                    BernsteinPoly q = lorentz_apply(oracle_from_poly(f), n, r);
                    CHECK(to_monomial(q) == f);
                }
            }
        }
    }
    SECTION("x^3 with r = 2 is not reproduced; residual shrinks with n") {
        Poly f = Poly::monomial(3);
        double prev = 1e9;
        for (unsigned n : {10u, 20u, 40u}) {
            BernsteinPoly q = lorentz_apply(oracle_from_poly(f), n, 2);
            CHECK(to_monomial(q) != f);
            double sup = 0;
            Poly qm = to_monomial(q);
            for (int i = 0; i <= 256; ++i) {
                double x = i / 256.0;
                sup = std::max(sup, std::abs(qm.eval(x) - f.eval(x)));
            }
            CHECK(sup < prev);
            prev = sup;
        }
    }
    SECTION("oracle combinator subtracts stored polynomial exactly") {
        Poly f({Rational(1), Rational(2), Rational(3)});
        BernsteinPoly g = from_monomial(Poly({Rational(0), Rational(1)}), 3);
        DerivativeOracle diff = oracle_minus_bernstein(oracle_from_poly(f), g, 2);
        Rational x = make_rat(2, 7);
        CHECK(diff(0, x, 32).lo == f.eval(x) - x);
        CHECK(diff(1, x, 32).lo == f.derivative().eval(x) - 1);
        CHECK(diff(2, x, 32).lo == f.derivative().derivative().eval(x));
    }
    SECTION("interval oracle produces enclosure; width obeys request") {
        // fixed-width oracle that sharpens with the precision request
        DerivativeOracle fuzzy{1, [](unsigned, const Rational& x, unsigned long prec) {
                                   Rational eps = pow2_rat(-static_cast<long>(prec));
                                   return RatInterval(x - eps, x + eps);
                               }};
        IntervalBernstein enc = lorentz_apply_enclosure(fuzzy, 6, 1, 40);
        CHECK_FALSE(enc.is_exact());
        CHECK(enc.max_width() <= pow2_rat(-40));
        // identity samples: true result is x, enclosed
        BernsteinPoly exact = lorentz_apply(oracle_from_poly(Poly::x()), 6, 1);
        for (unsigned k = 0; k <= 7; ++k) {
            CHECK(enc.lower.coeffs[k] <= exact.coeffs[k]);
            CHECK(enc.upper.coeffs[k] >= exact.coeffs[k]);
        }
    }
    SECTION("stubborn oracle raises precision error") {
        DerivativeOracle stuck{0, [](unsigned, const Rational& x, unsigned long) {
                                   return RatInterval(x - make_rat(1, 4), x + make_rat(1, 4));
                               }};
        CHECK_THROWS_AS(lorentz_apply_enclosure(stuck, 4, 0, 16), precision_error);
        CHECK_THROWS_AS(lorentz_apply(stuck, 4, 0), precision_error);
    }
}

TEST_CASE("simultaneous approximation diagnostics") {
    // ratios sup |(Q_{n,r}f - f)^(j)| / Delta_n^(alpha-j) stay bounded as n
    // doubles; only bounded growth is asserted, never a constant
    SECTION("smooth catalog target, all derivative orders") {
        auto f = coinsim::find_target("cubic");
        double alpha = 2.5;
        unsigned r = 2;
        for (unsigned j = 0; j <= r; ++j) {
            double prev = -1;
            for (unsigned n = 16; n <= 256; n *= 2) {
                double sup = simultaneous_approx_sup(f.oracle, alpha, n, r, j, 256);
                if (prev >= 0) CHECK(sup <= 2.0 * prev + 1e-12);
                prev = sup;
            }
        }
    }
    SECTION("holder target at its own exponent, j <= r") {
        auto f = coinsim::find_target("holder-3/2");
        double alpha = 1.5;
        unsigned r = 1;
        for (unsigned j = 0; j <= r; ++j) {
            double prev = -1;
            for (unsigned n = 16; n <= 256; n *= 2) {
                double sup = simultaneous_approx_sup(f.oracle, alpha, n, r, j, 256);
                if (prev >= 0) CHECK(sup <= 2.0 * prev + 1e-12);
                prev = sup;
            }
        }
    }
    SECTION("derivative-bound ratio |Q f^(r+1)| Delta^(r+1-alpha)") {
        auto f = coinsim::find_target("cubic");
        double prev = -1;
        for (unsigned n = 16; n <= 256; n *= 2) {
            double sup = derivative_bound_sup(f.oracle, 2.5, n, 2, 256);
            if (prev >= 0) CHECK(sup <= 2.0 * prev + 1e-12);
            prev = sup;
        }
    }
}

TEST_CASE("derivative growth of positive-cone polynomials (spot check)") {
    // for P_n = sum_k Delta_n(k/n)^alpha p_nk (nonnegative coefficients,
    // P_n comparable to Delta_n^alpha), the ratio sup |P_n^(j)| Delta_n^(j-alpha)
    // stays bounded across n doublings
    double alpha = 0.5;
    for (unsigned j : {1u, 2u}) {
        double prev = -1;
        for (unsigned n = 16; n <= 256; n *= 2) {
            std::vector<Rational> samples(n + 1);
            for (unsigned k = 0; k <= n; ++k) {
                RatInterval d = delta_n(make_rat(k, n), n, 48);
                samples[k] = nth_root_enclosure(d.hi, 2, 48).hi;  // Delta^(1/2), upper
            }
            BernsteinPoly p = bernstein_op(samples, n);
            BernsteinPoly dj = derivative(p, j);
            ScaledUnits su = make_scaled(dj);
            double sup = 0;
            for (int i = 0; i <= 256; ++i) {
                Rational x = make_rat(i, 256);
                double dn = delta_n_double(x.get_d(), n);
                sup = std::max(sup,
                               std::abs(eval_scaled(su, x).get_d()) * std::pow(dn, j - alpha));
            }
            if (prev >= 0) CHECK(sup <= 2.0 * prev + 1e-12);
            prev = sup;
        }
    }
}

TEST_CASE("operator preserves Hölder seminorm scale (spot check)") {
    // sampled seminorm of Q_{n,r} f stays within a fixed multiple of the
    // sampled seminorm of f across n
    auto f = coinsim::find_target("holder-3/2");
    std::vector<double> scales = {1.0 / 32, 1.0 / 128, 1.0 / 512};
    SeminormEstimate base = coinsim::holder_seminorm(f, f.default_alpha, scales, 1024);
    double f_sup = *std::max_element(base.values.begin(), base.values.end());
    // monomial-basis double evaluation is only trustworthy at small degree
    for (unsigned n : {16u, 32u}) {
        IntervalBernstein enc = lorentz_apply_enclosure(f.oracle, n, 1, 96);
        Poly q = to_monomial(enc.snap(n + 64));
        auto qf = coinsim::make_poly_target("qf", q, f.default_alpha, make_rat(1, 100));
        SeminormEstimate est = coinsim::holder_seminorm(qf, f.default_alpha, scales, 1024);
        for (double v : est.values) CHECK(v <= 4.0 * f_sup);
    }
}

TEST_CASE("coefficient bound report") {
    auto rows = coefficient_bound_report(3, 4, 256);
    double j2_first = 0, j2_last = 0;
    for (const auto& row : rows) {
        if (row.j == 0) CHECK(row.coeff_ratio == 1.0);
        if (row.j == 1) CHECK(row.coeff_ratio == 0.0);
        if (row.j == 2 && row.n == 4) j2_first = row.coeff_ratio;
        if (row.j == 2 && row.n == 256) j2_last = row.coeff_ratio;
    }
    REQUIRE(j2_first > 0);
    CHECK(j2_last <= 4.0 * j2_first);
    // pointwise ratio bounded across the sweep as well
    double sup2_first = 0, sup2_last = 0;
    for (const auto& row : rows) {
        if (row.j == 2 && row.n == 4) sup2_first = row.sup_ratio;
        if (row.j == 2 && row.n == 256) sup2_last = row.sup_ratio;
    }
    REQUIRE(sup2_first > 0);
    CHECK(sup2_last <= 4.0 * sup2_first);
}
