#include <catch2/catch_amalgamated.hpp>

#include <coinsim/io.hpp>

#include "micro.hpp"
#include "oracles.hpp"

using namespace coinsim;

TEST_CASE("rational and polynomial JSON") {
    Rational r = make_rat(-22, 7);
    CHECK(rat_from_json(rat_json(r)) == r);

    auto g = oracles::rng(17);
    BernsteinPoly p = oracles::random_bernstein(g, 5);
    Json j = poly_json(p);
    CHECK(j.at("degree") == 5);
    CHECK(j.at("coeffs").size() == 6);
    CHECK(poly_from_json(j) == p);
}

TEST_CASE("envelope pair JSON carries dyadic mantissas") {
    auto rungs = micro::tiny_ladder();
    Json j = pair_json(rungs[1]);
    CHECK(j.at("provenance") == "dyadic");
    CHECK(j.at("lower").contains("mantissas"));
    CHECK(j.at("lower").at("exponent") == 2);
    // mantissa_k = 2^2 C(2,k) a_k: a = (0, 1/4, 1/2) -> (0, 2, 2)
    CHECK(j.at("lower").at("mantissas")[1] == "2");

    EnvelopePair back = pair_from_json(j);
    CHECK(back.lower == rungs[1].lower);
    CHECK(back.upper == rungs[1].upper);

    SECTION("mantissas take precedence when both encodings present") {
        Json tampered = j;
        tampered["lower"]["coeffs"][1] = "9/17";  // must be ignored
        CHECK(pair_from_json(tampered).lower == rungs[1].lower);
    }
}

TEST_CASE("ladder manifest round trip") {
    auto target = find_target("affine");
    LadderParams params;
    params.alpha = make_rat(3, 2);
    params.n0 = 8;
    params.max_level = 1;
    EnvelopeLadder lad = build_envelopes(target, params);
    Json j = ladder_json(lad);
    CHECK(j.at("format") == "coinsim-envelope-ladder");

    EnvelopeLadder back = ladder_from_json(j);
    CHECK(back.target_id == "affine");
    CHECK(back.params.alpha == params.alpha);
    CHECK(back.certification.ok);
    REQUIRE(back.rungs.size() == lad.rungs.size());
    for (std::size_t m = 0; m < lad.rungs.size(); ++m) {
        CHECK(back.rungs[m].lower == lad.rungs[m].lower);
        CHECK(back.rungs[m].upper == lad.rungs[m].upper);
    }
    // identical stage tables drive identical simulations
    Simulator s1(lad), s2(back);
    for (std::size_t m = 0; m < s1.stages().size(); ++m) {
        CHECK(s1.stages()[m].accept1 == s2.stages()[m].accept1);
        CHECK(s1.stages()[m].cont == s2.stages()[m].cont);
    }

    SECTION("wrong format flag rejected") {
        Json bad = j;
        bad["format"] = "something-else";
        CHECK_THROWS_AS(ladder_from_json(bad), io_error);
    }
}

TEST_CASE("replay bit files round trip") {
    std::vector<std::uint8_t> bits = {1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1};
    std::string path = "io_bits_test.bin";
    write_bits(path, bits);
    CHECK(read_bits(path) == bits);
    std::string raw = read_file(path);
    REQUIRE(raw.size() == 8 + 2);
    CHECK(static_cast<unsigned char>(raw[0]) == 11);  // little-endian length header

    SECTION("truncation detected") {
        write_file(path, raw.substr(0, 8));
        CHECK_THROWS_AS(read_bits(path), io_error);
    }
}

TEST_CASE("tails CSV has the mandated columns") {
    auto rungs = micro::tiny_ladder();
    Simulator sim(rungs);
    TailStats stats = monte_carlo_tails(sim, {make_rat(1, 2)}, 500, 11, 1);
    std::string csv = tails_csv(stats);
    CHECK(csv.rfind("p,n,survivors,replications,lower,upper\n", 0) == 0);
    CHECK(csv.find("1/2,1,") != std::string::npos);

    Json j = tails_json(stats, nullptr, "abc");
    CHECK(j.at("curves")[0].at("survivors").size() == 2);
}

TEST_CASE("user target JSON") {
    Json j;
    j["id"] = "my-power";
    j["center"] = "1/2";
    j["exponent"] = "1/2";
    j["scale"] = "1/4";
    j["offset"] = "1/2";
    TargetFunction t = target_from_json(j);
    CHECK(t.id == "my-power");
    CHECK(t.oracle.max_order == 0);
    RatInterval v = t.oracle(0, make_rat(1, 4), 40);
    CHECK(v.is_point());
    CHECK(v.lo == make_rat(5, 8));  // 1/2 + 1/4 * 1/2
}

TEST_CASE("hash is stable") {
    CHECK(hash_hex(fnv1a_hash("coinsim")) == hash_hex(fnv1a_hash("coinsim")));
    CHECK(hash_hex(fnv1a_hash("a")) != hash_hex(fnv1a_hash("b")));
}
