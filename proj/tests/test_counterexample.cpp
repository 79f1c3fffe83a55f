#include <catch2/catch_amalgamated.hpp>

#include <coinsim/counterexample.hpp>
#include <coinsim/target.hpp>

#include "oracles.hpp"

#include <complex>

using namespace coinsim;

TEST_CASE("taylor polynomial of exp(-x^2)") {
    SECTION("n = 1 gives 1 - x^2") {
        CHECK(taylor_exp_neg_sq(1) == Poly({Rational(1), Rational(0), Rational(-1)}));
    }
    SECTION("approximation on the disc |z| = sqrt(n)/e") {
        for (unsigned n : {4u, 8u, 16u, 32u}) {
            Poly p = taylor_exp_neg_sq(n);
            std::vector<std::complex<long double>> coeffs;
            for (const auto& c : p.c) coeffs.push_back({static_cast<long double>(c.get_d()), 0.0L});
            long double radius = std::sqrt(static_cast<long double>(n)) / std::exp(1.0L);
            long double pi = 3.14159265358979323846L;
            for (int i = 0; i < 64; ++i) {
                long double phi = 2 * pi * i / 64;
                std::complex<long double> z(radius * std::cos(phi), radius * std::sin(phi));
                std::complex<long double> acc(0, 0);
                for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
                std::complex<long double> truth = std::exp(-z * z);
                CHECK(std::abs(acc - truth) < std::exp(-static_cast<long double>(n)));
            }
        }
    }
    SECTION("strictly positive on the real segment of the disc") {
        for (unsigned n : {4u, 16u, 32u}) {
            Poly p = taylor_exp_neg_sq(n);
            // rational grid on [-sqrt(n)/e, sqrt(n)/e]: |x| <= floor(256 sqrt(n)/e)/256
            Rational reach = make_rat(static_cast<long>(256.0 * std::sqrt(double(n)) / std::exp(1.0)), 256);
            for (int i = -256; i <= 256; ++i) {
                Rational x = reach * make_rat(i, 256);
                CHECK(p.eval(x) > 0);
            }
        }
    }
}

TEST_CASE("positive cone on [a,b]") {
    Rational a(-1), b(1);
    SECTION("hand examples") {
        // x + 2 = (x+1) + 1 in B+_1[-1,1]
        CHECK(in_positive_cone(Poly({Rational(2), Rational(1)}), 1, a, b));
        // x is not in B+_1[-1,1] (negative at -1)
        CHECK_FALSE(in_positive_cone(Poly::x(), 1, a, b));
        // 1 + x^2 = ((1-x)^2 + (1+x)^2)/2; bare x^2 vanishes at 0 and is in
        // no B+_n[-1,1] at all
        CHECK(in_positive_cone(Poly({Rational(1), Rational(0), Rational(1)}), 2, a, b));
        CHECK_FALSE(in_positive_cone(Poly::monomial(2), 2, a, b));
        CHECK_FALSE(in_positive_cone(Poly::monomial(2), 6, a, b));
    }
    SECTION("cone closure under elevation (a)") {
        auto g = oracles::rng(5150);
        for (int t = 0; t < 10; ++t) {
            // random nonnegative combination at degree 3
            std::vector<Rational> c(4);
            for (auto& v : c) v = rat_abs(oracles::random_rational(g, 8, 8));
            Poly p;
            for (unsigned k = 0; k <= 3; ++k) {
                Poly term = Poly::constant(c[k]);
                for (unsigned i = 0; i < k; ++i) term = term * Poly({Rational(1), Rational(1)});
                for (unsigned i = 0; i < 3 - k; ++i) term = term * Poly({Rational(1), Rational(-1)});
                p = p + term;
            }
            REQUIRE(in_positive_cone(p, 3, a, b));
            CHECK(in_positive_cone(p, 4, a, b));
            CHECK(in_positive_cone(p, 7, a, b));
        }
    }
    SECTION("cone closure under products (b)") {
        Poly p({Rational(2), Rational(1)});   // in B+_1
        Poly q({Rational(3), Rational(-1)});  // 3 - x = (1-x) + 2
        REQUIRE(in_positive_cone(p, 1, a, b));
        REQUIRE(in_positive_cone(q, 1, a, b));
        CHECK(in_positive_cone(p * q, 2, a, b));
    }
    SECTION("cone restriction to subintervals (c)") {
        Poly p({Rational(2), Rational(1)});
        CHECK(in_positive_cone(p, 1, make_rat(-1, 2), make_rat(1, 2)));
        CHECK(in_positive_cone(p, 1, Rational(0), Rational(1)));
    }
}

TEST_CASE("convolution approximants live in the cone, exactly") {
    // a three-point measure inside [-2,2]
    std::vector<std::pair<Rational, Rational>> masses = {
        {make_rat(-1, 2), make_rat(1, 3)}, {Rational(0), make_rat(1, 2)}, {Rational(1), make_rat(1, 4)}};
    for (unsigned long n : {1ul, 2ul}) {
        Poly pn = convolution_approximant(masses, n);
        CHECK(pn.degree() == static_cast<int>(200 * n));
        CHECK(in_positive_cone(pn, static_cast<unsigned>(200 * n), Rational(-1), Rational(1)));
    }
    SECTION("masses outside [-2,2] are truncated away") {
        std::vector<std::pair<Rational, Rational>> far = {{Rational(3), Rational(1)}};
        CHECK(convolution_approximant(far, 1).is_zero());
    }
}

TEST_CASE("theta targets") {
    SECTION("dual representations agree at a reference point") {
        ThetaEval e = theta_target(0.5L, 16, 0.37L);
        CHECK(std::abs(e.spatial - e.fourier) < 1e-12L);
    }
    SECTION("dual representations agree at 100 random desk-scale points") {
        auto g = oracles::rng(31415);
        std::uniform_real_distribution<double> hx(0.3, 0.95), xx(0.0, 1.0);
        std::uniform_int_distribution<unsigned long> mm(1, 64);
        for (int t = 0; t < 100; ++t) {
            ThetaEval e = theta_target(hx(g), mm(g), xx(g));
            CHECK(std::abs(e.spatial - e.fourier) < 1e-12L);
        }
    }
    SECTION("maximum at 0 and the probe drop") {
        long double h = 0.5L;
        unsigned long m = 16;
        long double probe = h / (2 * std::sqrt(static_cast<long double>(m)));
        long double f0 = theta_target(h, m, 0.0L).fourier;
        long double fp = theta_target(h, m, probe).fourier;
        long double floor_gap = 4 * std::exp(-3.14159265358979324L / (h * h));
        CHECK(f0 - fp >= floor_gap);
    }
    SECTION("sup deviation from 1 is at most 4 exp(-pi/h^2) on a 1024 grid") {
        long double h = 0.5L;
        unsigned long m = 16;
        long double cap = 4 * std::exp(-3.14159265358979324L / (h * h));
        for (int i = 0; i <= 1024; ++i) {
            long double x = static_cast<long double>(i) / 1024;
            CHECK(std::abs(theta_target(h, m, x).spatial - 1.0L) <= cap);
        }
    }
}

TEST_CASE("schedule") {
    SECTION("alpha = 1/2: first admissible exponent is 67") {
        CHECK(first_schedule_exponent(make_rat(1, 2)) == 67);
    }
    SECTION("m_max below the first scheduled m is an empty construction") {
        CHECK_THROWS_AS(build_counterexample(make_rat(1, 2), 8), empty_construction_error);
        CHECK_THROWS_AS(build_counterexample(make_rat(1, 2), 2), empty_construction_error);
    }
    SECTION("alpha outside (0,1) rejected") {
        CHECK_THROWS_AS(build_counterexample(make_rat(3, 2), 80), std::invalid_argument);
    }
    SECTION("schedule identity and monotonicity") {
        Counterexample ce = build_counterexample(make_rat(1, 2), 90);
        REQUIRE(ce.j0 == 67);
        REQUIRE(ce.schedule.size() == 90 - 67 + 1);
        const double pi = 3.14159265358979323846;
        double prev_h = 1.0;
        for (const auto& e : ce.schedule) {
            // e^(-pi/h^2) (log2 m)^-2 = m^(-alpha/2), in logs to 1e-12
            double lhs = -pi / (e.h * e.h) - 2.0 * std::log(static_cast<double>(e.j));
            double rhs = -0.25 * e.j * std::log(2.0);
            CHECK(std::abs(lhs - rhs) < 1e-9);
            CHECK(e.h < prev_h);
            CHECK(e.h < 1.0);
            prev_h = e.h;
        }
    }
}

TEST_CASE("rate sweep: scaled error bounded across the dyadic sweep") {
    Counterexample ce = build_counterexample(make_rat(1, 2), 90);
    auto rows = rate_sweep(ce, 68, 80);
    REQUIRE(rows.size() == 13);
    for (const auto& r : rows) {
        CHECK(r.scaled_sup > 0);
        CHECK(r.scaled_at_0 > 0);
        CHECK(r.scaled_at_0 <= r.scaled_sup);  // pointwise below the global bound
    }
    CHECK(rows.back().scaled_sup <= 2.0 * rows.front().scaled_sup);
    CHECK(rows.front().scaled_sup <= 2.0 * rows.back().scaled_sup);
    CHECK(rows.back().scaled_at_0 <= 2.0 * rows.front().scaled_at_0);
}

TEST_CASE("divergence report: probe quotients grow without bound") {
    Counterexample ce = build_counterexample(make_rat(1, 2), 12000);
    auto rows = divergence_report(ce);
    REQUIRE(rows.size() > 3);
    SECTION("strictly increasing along the schedule") {
        for (std::size_t i = 0; i + 1 < rows.size(); ++i)
            CHECK(rows[i + 1].log_quotient > rows[i].log_quotient);
    }
    SECTION("certified lower bound matches the closed form to first order") {
        for (const auto& r : rows)
            CHECK(r.log_quotient >= r.closed_form - 1e-9);
    }
    SECTION("exceeds 5x the initial value within the extended schedule") {
        double growth = rows.back().log_quotient - rows.front().log_quotient;
        CHECK(growth > std::log(5.0));
    }
    SECTION("smooth negative control stays bounded under the same probes") {
        auto cubic = find_target("cubic");
        std::vector<double> log_probes;
        for (std::size_t i = 0; i < rows.size(); i += rows.size() / 8)
            log_probes.push_back(ce.schedule[i].log_probe);
        double lipschitz = 0.8;  // sup |f'| = 3/4 near 0, padded
        auto logq = control_quotients([&](double x) { return cubic.approx(0, x); }, lipschitz, 0.5,
                                      log_probes);
        for (std::size_t i = 0; i + 1 < logq.size(); ++i) CHECK(logq[i + 1] <= logq[i] + 1e-9);
        CHECK(logq.back() < logq.front());
        // divergent family crosses any smooth control eventually
        CHECK(rows.back().log_quotient > logq.front());
    }
}

TEST_CASE("x(1-x)-multiplied variant stays within the pointwise scale") {
    Counterexample ce = build_counterexample(make_rat(1, 2), 90);
    double first = tilde_ratio_max(ce, 68);
    REQUIRE(first > 0);
    for (unsigned j = 69; j <= 80; j += 3) {
        double r = tilde_ratio_max(ce, j);
        CHECK(r > 0);
        CHECK(r <= 2.0 * first);
    }
}
