#ifndef COINSIM_IO_HPP
#define COINSIM_IO_HPP

// File formats: the envelope-ladder JSON manifest (the simulator's input
// contract), TailStats CSV/JSON, counterexample CSVs, and replay bit files.
// Rationals serialize as decimal strings "p/q"; dyadic coefficient arrays
// additionally carry {"exponent", "mantissas"} with mantissa_k =
// 2^degree C(degree,k) coeff_k. Manifests contain no wall-clock data, so
// identical inputs produce byte-identical files.

#include "counterexample.hpp"
#include "envelope.hpp"
#include "simulate.hpp"
#include "target.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinsim {

using Json = nlohmann::ordered_json;

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a_hash(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ----------------------------------------------------------------- numbers

inline Json rat_json(const Rational& r) { return rat_to_string(r); }

inline Rational rat_from_json(const Json& j) {
    if (!j.is_string()) throw io_error("expected rational as string");
    return rat_from_string(j.get<std::string>());
}

// ------------------------------------------------------------- polynomials

inline Json poly_json(const BernsteinPoly& p) {
    Json j;
    j["degree"] = p.degree;
    Json coeffs = Json::array();
    for (const auto& c : p.coeffs) coeffs.push_back(rat_json(c));
    j["coeffs"] = coeffs;
    return j;
}

inline BernsteinPoly poly_from_json(const Json& j) {
    unsigned degree = j.at("degree").get<unsigned>();
    std::vector<Rational> coeffs;
    for (const auto& c : j.at("coeffs")) coeffs.push_back(rat_from_json(c));
    return BernsteinPoly(degree, std::move(coeffs));
}

inline Json coeff_array_json(const std::vector<Rational>& coeffs, unsigned degree, bool dyadic) {
    Json j;
    Json plain = Json::array();
    for (const auto& c : coeffs) plain.push_back(rat_json(c));
    j["coeffs"] = plain;
    if (dyadic) {
        auto m = detail::dyadic_mantissas(coeffs, degree);
        j["exponent"] = degree;
        Json mant = Json::array();
        for (const auto& v : m) mant.push_back(v.get_str());
        j["mantissas"] = mant;
    }
    return j;
}

inline std::vector<Rational> coeff_array_from_json(const Json& j, unsigned degree) {
    std::vector<Rational> coeffs;
    if (j.contains("mantissas")) {
        unsigned long e = j.at("exponent").get<unsigned long>();
        Integer scale = pow2_int(e);
        auto row = binomial_row(degree);
        unsigned k = 0;
        for (const auto& m : j.at("mantissas"))
            coeffs.push_back(make_rat(Integer(m.get<std::string>()), (*row)[k++] * scale));
    } else {
        for (const auto& c : j.at("coeffs")) coeffs.push_back(rat_from_json(c));
    }
    if (coeffs.size() != degree + 1) throw io_error("coefficient count does not match degree");
    return coeffs;
}

// ---------------------------------------------------------------- ladders

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Raw: return "raw";
        case Provenance::FilledIn: return "filled-in";
        default: return "dyadic";
    }
}

inline Provenance provenance_from_name(const std::string& s) {
    if (s == "raw") return Provenance::Raw;
    if (s == "filled-in") return Provenance::FilledIn;
    if (s == "dyadic") return Provenance::Dyadic;
    throw io_error("unknown provenance '" + s + "'");
}

inline Json pair_json(const EnvelopePair& e) {
    Json j;
    j["level"] = e.level;
    j["degree"] = e.degree;
    j["provenance"] = provenance_name(e.provenance);
    bool dyadic = e.provenance == Provenance::Dyadic || e.provenance == Provenance::FilledIn;
    j["lower"] = coeff_array_json(e.lower, e.degree, dyadic);
    j["upper"] = coeff_array_json(e.upper, e.degree, dyadic);
    return j;
}

inline EnvelopePair pair_from_json(const Json& j) {
    EnvelopePair e;
    e.level = j.at("level").get<unsigned>();
    e.degree = j.at("degree").get<unsigned>();
    e.provenance = provenance_from_name(j.at("provenance").get<std::string>());
    e.lower = coeff_array_from_json(j.at("lower"), e.degree);
    e.upper = coeff_array_from_json(j.at("upper"), e.degree);
    return e;
}

inline Json params_json(const LadderParams& p) {
    Json j;
    j["n0"] = p.n0;
    j["b"] = p.b;
    j["alpha"] = rat_json(p.alpha);
    j["theta"] = rat_json(p.theta);
    j["D"] = rat_json(p.D);
    j["gamma"] = rat_json(p.gamma);
    j["delta"] = rat_json(p.delta);
    j["max_level"] = p.max_level;
    j["retry_budget"] = p.retry_budget;
    return j;
}

inline LadderParams params_from_json(const Json& j) {
    LadderParams p;
    p.n0 = j.at("n0").get<unsigned>();
    p.b = j.at("b").get<unsigned>();
    p.alpha = rat_from_json(j.at("alpha"));
    p.theta = rat_from_json(j.at("theta"));
    p.D = rat_from_json(j.at("D"));
    p.gamma = rat_from_json(j.at("gamma"));
    p.delta = rat_from_json(j.at("delta"));
    p.max_level = j.at("max_level").get<unsigned>();
    p.retry_budget = j.at("retry_budget").get<unsigned>();
    return p;
}

inline Json certification_json(const CertificationReport& r) {
    Json j;
    j["ok"] = r.ok;
    j["cond_i"] = r.cond_i;
    j["cond_ii_prime"] = r.cond_ii;
    j["cond_iii"] = r.cond_iii;
    j["cond_iv"] = r.cond_iv;
    j["iii_method"] = r.iii_method;
    j["grid_points"] = r.grid_points;
    Json v = Json::array();
    for (const auto& viol : r.violations) {
        Json one;
        one["condition"] = viol.condition;
        one["level"] = viol.level;
        one["index"] = viol.index;
        one["detail"] = viol.detail;
        v.push_back(one);
    }
    j["violations"] = v;
    return j;
}

inline CertificationReport certification_from_json(const Json& j) {
    CertificationReport r;
    r.ok = j.at("ok").get<bool>();
    r.cond_i = j.at("cond_i").get<bool>();
    r.cond_ii = j.at("cond_ii_prime").get<bool>();
    r.cond_iii = j.at("cond_iii").get<bool>();
    r.cond_iv = j.at("cond_iv").get<bool>();
    r.iii_method = j.at("iii_method").get<std::string>();
    r.grid_points = j.at("grid_points").get<unsigned>();
    for (const auto& one : j.at("violations")) {
        Violation v;
        v.condition = one.at("condition").get<std::string>();
        v.level = one.at("level").get<unsigned>();
        v.index = one.at("index").get<long>();
        v.detail = one.at("detail").get<std::string>();
        r.violations.push_back(v);
    }
    return r;
}

inline Json ladder_json(const EnvelopeLadder& lad) {
    Json j;
    j["format"] = "coinsim-envelope-ladder";
    j["version"] = 1;
    j["target"] = lad.target_id;
    j["params"] = params_json(lad.params);
    j["attempts"] = lad.attempts;
    Json rungs = Json::array();
    for (const auto& e : lad.rungs) rungs.push_back(pair_json(e));
    j["rungs"] = rungs;
    j["certification"] = certification_json(lad.certification);
    return j;
}

inline EnvelopeLadder ladder_from_json(const Json& j) {
    if (!j.contains("format") || j.at("format") != "coinsim-envelope-ladder")
        throw io_error("not an envelope-ladder manifest");
    EnvelopeLadder lad;
    lad.target_id = j.at("target").get<std::string>();
    lad.params = params_from_json(j.at("params"));
    lad.attempts = j.at("attempts").get<unsigned>();
    for (const auto& r : j.at("rungs")) lad.rungs.push_back(pair_from_json(r));
    lad.certification = certification_from_json(j.at("certification"));
    return lad;
}

// ------------------------------------------------------------------ files

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << data;
    if (!out) throw io_error("write failed for '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json_file(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("corrupt JSON in '" + path + "': " + e.what());
    }
}

// ------------------------------------------------------------- bit files

// 8-byte little-endian bit count, then the bits packed LSB-first
inline void write_bits(const std::string& path, const std::vector<std::uint8_t>& bits) {
    std::string data;
    std::uint64_t n = bits.size();
    for (int i = 0; i < 8; ++i) data.push_back(static_cast<char>((n >> (8 * i)) & 0xFF));
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        unsigned char byte = 0;
        for (std::size_t b = 0; b < 8 && i + b < bits.size(); ++b)
            if (bits[i + b]) byte |= (1u << b);
        data.push_back(static_cast<char>(byte));
    }
    write_file(path, data);
}

inline std::vector<std::uint8_t> read_bits(const std::string& path) {
    std::string data = read_file(path);
    if (data.size() < 8) throw io_error("bit file too short: '" + path + "'");
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i)
        n |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[i])) << (8 * i);
    if (data.size() < 8 + (n + 7) / 8) throw io_error("bit file truncated: '" + path + "'");
    std::vector<std::uint8_t> bits(n);
    for (std::uint64_t i = 0; i < n; ++i)
        bits[i] = (static_cast<unsigned char>(data[8 + i / 8]) >> (i % 8)) & 1;
    return bits;
}

// ------------------------------------------------------------ tail stats

// mandated columns: p, n, survivors, replications, lower, upper
inline std::string tails_csv(const TailStats& stats, double z = 1.96) {
    std::ostringstream out;
    out << "p,n,survivors,replications,lower,upper\n";
    for (const auto& c : stats.curves) {
        for (std::size_t m = 0; m < stats.degrees.size(); ++m) {
            auto [lo, hi] = wilson_interval(c.survivors[m], c.replications, z);
            out << rat_to_string(c.p) << ',' << stats.degrees[m] << ',' << c.survivors[m] << ','
                << c.replications << ',' << lo << ',' << hi << '\n';
        }
    }
    return out.str();
}

// JSON report with the certified-gap and Delta_n(p)^alpha predictions beside
// the empirical survival, so plots need no recomputation.
inline Json tails_json(const TailStats& stats, const EnvelopeLadder* ladder,
                       const std::string& ladder_hash) {
    Json j;
    j["format"] = "coinsim-tails";
    j["seed"] = stats.seed;
    j["ladder_hash"] = ladder_hash;
    Json degrees = Json::array();
    for (auto d : stats.degrees) degrees.push_back(d);
    j["degrees"] = degrees;
    Json curves = Json::array();
    for (const auto& c : stats.curves) {
        Json cj;
        cj["p"] = rat_json(c.p);
        cj["replications"] = c.replications;
        cj["ones"] = c.ones;
        cj["zeros"] = c.zeros;
        cj["timeouts"] = c.timeouts;
        if (c.ones + c.zeros > 0)
            cj["freq_one_decided"] =
                static_cast<double>(c.ones) / static_cast<double>(c.ones + c.zeros);
        Json surv = Json::array(), lo = Json::array(), hi = Json::array();
        for (std::size_t m = 0; m < stats.degrees.size(); ++m) {
            surv.push_back(c.survivors[m]);
            auto [l, h] = wilson_interval(c.survivors[m], c.replications, 1.96);
            lo.push_back(l);
            hi.push_back(h);
        }
        cj["survivors"] = surv;
        cj["wilson_lower"] = lo;
        cj["wilson_upper"] = hi;
        if (c.slope_valid) cj["survival_loglog_slope"] = c.slope_loglog;
        if (ladder) {
            Json gaps = Json::array(), deltas = Json::array();
            double alpha = ladder->params.alpha.get_d();
            for (const auto& e : ladder->rungs) {
                gaps.push_back(pair_gap_at(e, c.p).get_d());
                deltas.push_back(std::pow(delta_n_double(c.p.get_d(), e.level), alpha));
            }
            cj["certified_gap"] = gaps;
            cj["delta_alpha"] = deltas;
        }
        curves.push_back(cj);
    }
    j["curves"] = curves;
    return j;
}

// ------------------------------------------------- counterexample reports

inline std::string rate_csv(const Counterexample& ce, const std::vector<RateRow>& rows) {
    std::ostringstream out;
    out << "n,sup_error,scaled_sup_error,log2_n,error_at_0,scaled_error_at_0,tilde_ratio_max\n";
    for (const auto& r : rows) {
        double n = std::pow(2.0, static_cast<double>(r.j));
        out << n << ',' << std::pow(2.0, r.log2_sup_bound) << ',' << r.scaled_sup << ',' << r.j
            << ',' << std::pow(2.0, r.log2_err_at_0) << ',' << r.scaled_at_0 << ','
            << tilde_ratio_max(ce, r.j) << '\n';
    }
    return out.str();
}

inline std::string divergence_csv(const std::vector<ProbeRow>& rows) {
    std::ostringstream out;
    out << "m,probe_quotient,log2_m,h\n";
    for (const auto& r : rows) {
        out << "2^" << r.j << ',' << std::exp(r.log_quotient) << ',' << r.j << ',' << r.h << '\n';
    }
    return out.str();
}

// user-defined piecewise-power target: {"id", "center", "exponent", "scale",
// "offset", "delta"}
inline TargetFunction target_from_json(const Json& j) {
    std::string id = j.contains("id") ? j.at("id").get<std::string>() : "user-power";
    Rational center = rat_from_json(j.at("center"));
    Rational exponent = rat_from_json(j.at("exponent"));
    Rational scale = rat_from_json(j.at("scale"));
    Rational offset = rat_from_json(j.at("offset"));
    Rational delta = j.contains("delta") ? rat_from_json(j.at("delta")) : make_rat(1, 16);
    return make_power_target(id, center, exponent, scale, offset, delta);
}

}  // namespace coinsim

#endif
