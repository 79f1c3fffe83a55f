// Command-line front end: envelope construction + certification, exact
// f(p)-coin simulation, Monte Carlo tail analysis, and the positive-cone
// approximation counterexample. Exit codes: 0 success, 1 usage,
// 2 construction/math failure, 3 I/O or contract failure.

#include <CLI11.hpp>

#include <coinsim/io.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace coinsim;

struct BuildOptions {
    std::string target = "affine";
    std::string target_file;
    std::string alpha;
    unsigned n0 = 16;
    unsigned b = 4;
    unsigned rungs = 3;
    std::string theta = "1";
    std::string D = "1";
    std::string gamma = "1/10";
    std::string delta = "1/8";
    std::string out = "ladder.json";
};

TargetFunction load_target(const std::string& id, const std::string& file) {
    if (!file.empty()) return target_from_json(parse_json_file(file));
    return find_target(id);
}

int cmd_build(const BuildOptions& opt) {
    TargetFunction target = load_target(opt.target, opt.target_file);
    LadderParams params;
    params.alpha = opt.alpha.empty() ? target.default_alpha : rat_from_string(opt.alpha);
    params.n0 = opt.n0;
    params.b = opt.b;
    if (opt.rungs == 0) throw std::invalid_argument("--rungs must be positive");
    params.max_level = opt.rungs - 1;
    params.theta = rat_from_string(opt.theta);
    params.D = rat_from_string(opt.D);
    params.gamma = rat_from_string(opt.gamma);
    params.delta = rat_from_string(opt.delta);
    validate(params);

    EnvelopeLadder ladder = build_envelopes(target, params);
    std::string data = dump_json(ladder_json(ladder));
    write_file(opt.out, data);

    std::cout << "certified ladder for target '" << target.id << "' at alpha "
              << rat_to_string(ladder.params.alpha) << "\n";
    std::cout << "  rungs:";
    for (const auto& e : ladder.rungs) std::cout << ' ' << e.level << "(deg " << e.degree << ")";
    std::cout << "\n  knobs: theta=" << rat_to_string(ladder.params.theta)
              << " D=" << rat_to_string(ladder.params.D) << " attempts=" << ladder.attempts
              << "\n  (iii) method: " << ladder.certification.iii_method
              << "\n  manifest: " << opt.out << " (hash " << hash_hex(fnv1a_hash(data)) << ")\n";
    return 0;
}

struct SimOptions {
    std::string manifest;
    std::vector<std::string> ps;
    unsigned long reps = 100000;
    std::uint64_t seed = 12345;
    unsigned threads = 1;
    std::string out;
    std::string format = "json";
    std::string replay_p, replay_fair;
};

Json run_manifest(const std::string& command, const SimOptions& opt, const std::string& hash) {
    Json m;
    m["command"] = command;
    m["input"] = opt.manifest;
    m["input_hash"] = hash;
    m["seed"] = opt.seed;
    m["replications"] = opt.reps;
    Json ps = Json::array();
    for (const auto& p : opt.ps) ps.push_back(p);
    m["p"] = ps;
    m["version"] = "coinsim 1.0";
    return m;
}

int cmd_simulate(const SimOptions& opt, bool tails_mode) {
    std::string raw = read_file(opt.manifest);
    std::string hash = hash_hex(fnv1a_hash(raw));
    Json mj;
    try {
        mj = Json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error("corrupt manifest '" + opt.manifest + "': " + e.what());
    }
    EnvelopeLadder ladder = ladder_from_json(mj);
    Simulator sim(ladder);

    if (!opt.replay_p.empty() || !opt.replay_fair.empty()) {
        if (opt.replay_p.empty() || opt.replay_fair.empty())
            throw std::invalid_argument("replay needs both --replay-p and --replay-fair");
        ReplaySource pc(read_bits(opt.replay_p));
        ReplaySource fc(read_bits(opt.replay_fair));
        SimResult r = simulate(sim, pc, fc, true);
        Json j;
        j["format"] = "coinsim-replay";
        j["manifest"] = run_manifest("simulate-replay", opt, hash);
        j["outcome"] = r.outcome == SimResult::Outcome::One
                           ? "1"
                           : (r.outcome == SimResult::Outcome::Zero ? "0" : "timeout");
        j["tosses"] = r.tosses;
        j["stages_used"] = r.stages_used;
        Json transcript = Json::array();
        for (StepKind k : r.transcript)
            transcript.push_back(k == StepKind::Accept1   ? "accept-1"
                                 : k == StepKind::Accept0 ? "accept-0"
                                                          : "continue");
        j["transcript"] = transcript;
        std::string data = dump_json(j);
        if (!opt.out.empty()) write_file(opt.out, data);
        std::cout << data;
        return 0;
    }

    std::vector<Rational> ps;
    for (const auto& s : opt.ps) {
        Rational p = rat_from_string(s);
        if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0,1]");
        ps.push_back(p);
    }
    if (ps.empty()) ps.push_back(make_rat(1, 2));

    TailStats stats = monte_carlo_tails(sim, ps, opt.reps, opt.seed, opt.threads);
    Json j = tails_json(stats, &ladder, hash);
    j["manifest"] = run_manifest(tails_mode ? "tails" : "simulate", opt, hash);

    std::string base = opt.out.empty() ? (tails_mode ? "tails" : "simulate") : opt.out;
    if (tails_mode || opt.format == "csv") {
        write_file(base + ".csv", tails_csv(stats));
        std::cout << "wrote " << base << ".csv\n";
    }
    if (opt.format != "csv" || tails_mode) {
        write_file(base + ".json", dump_json(j));
        std::cout << "wrote " << base << ".json\n";
    }
    for (const auto& c : stats.curves) {
        std::cout << "p=" << rat_to_string(c.p);
        if (c.ones + c.zeros > 0)
            std::cout << " freq(1|decided)=" << static_cast<double>(c.ones) / (c.ones + c.zeros);
        std::cout << " timeouts=" << c.timeouts;
        if (c.slope_valid) std::cout << " survival_slope=" << c.slope_loglog;
        std::cout << "\n";
    }
    return 0;
}

struct CexOptions {
    std::string alpha = "1/2";
    unsigned m_max_log2 = 90;
    unsigned sweep_from = 0, sweep_to = 0;
    std::string out_prefix = "counterexample";
};

int cmd_counterexample(const CexOptions& opt) {
    Rational alpha = rat_from_string(opt.alpha);
    Counterexample ce = build_counterexample(alpha, opt.m_max_log2);
    unsigned from = opt.sweep_from ? opt.sweep_from : ce.j0 + 1;
    unsigned to = opt.sweep_to ? opt.sweep_to : std::min(ce.j0 + 13, opt.m_max_log2);
    auto rate = rate_sweep(ce, from, to);
    auto probes = divergence_report(ce);
    write_file(opt.out_prefix + "_rate.csv", rate_csv(ce, rate));
    write_file(opt.out_prefix + "_divergence.csv", divergence_csv(probes));
    std::cout << "schedule starts at m = 2^" << ce.j0 << " with " << ce.schedule.size()
              << " scheduled m; wrote " << opt.out_prefix << "_rate.csv and " << opt.out_prefix
              << "_divergence.csv\n";
    return 0;
}

int cmd_targets() {
    for (const auto& t : catalog()) {
        std::cout << t.id << "  alpha=" << rat_to_string(t.default_alpha) << "  r=" << t.r()
                  << "  delta=" << rat_to_string(t.delta) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bernstein-positive envelopes and exact f(p)-coin simulation"};
    app.require_subcommand(1);

    BuildOptions bopt;
    CLI::App* build = app.add_subcommand("build", "construct and certify an envelope ladder");
    build->add_option("--target", bopt.target, "catalog target id");
    build->add_option("--target-file", bopt.target_file, "JSON file with a piecewise-power target");
    build->add_option("--alpha", bopt.alpha, "smoothness exponent p/q (non-integer)");
    build->add_option("--n0", bopt.n0, "base rung");
    build->add_option("--b", bopt.b, "ladder ratio (power of 2)");
    build->add_option("--rungs", bopt.rungs, "number of rungs");
    build->add_option("--theta", bopt.theta, "phi padding constant");
    build->add_option("--D", bopt.D, "correction multiplier");
    build->add_option("--gamma", bopt.gamma, "domination margin");
    build->add_option("--delta", bopt.delta, "range margin");
    build->add_option("--out", bopt.out, "output manifest path");

    SimOptions sopt;
    CLI::App* sim = app.add_subcommand("simulate", "replications of the exact coin simulation");
    CLI::App* tails = app.add_subcommand("tails", "survival curves and slope fits");
    for (CLI::App* sub : {sim, tails}) {
        sub->add_option("--manifest", sopt.manifest, "envelope ladder manifest")->required();
        sub->add_option("--p", sopt.ps, "heads probability p/q (repeatable)");
        sub->add_option("--reps", sopt.reps, "replications");
        sub->add_option("--seed", sopt.seed, "random seed");
        sub->add_option("--threads", sopt.threads, "worker threads");
        sub->add_option("--out", sopt.out, "output path base");
        sub->add_option("--format", sopt.format, "json or csv");
    }
    sim->add_option("--replay-p", sopt.replay_p, "replay bit file for the p-coin");
    sim->add_option("--replay-fair", sopt.replay_fair, "replay bit file for the fair coin");

    CexOptions copt;
    CLI::App* cex = app.add_subcommand("counterexample", "rate-without-smoothness construction");
    cex->add_option("--alpha", copt.alpha, "exponent in (0,1)");
    cex->add_option("--m-max-log2", copt.m_max_log2, "largest scheduled m as a power of 2");
    cex->add_option("--sweep-from", copt.sweep_from, "rate sweep start exponent");
    cex->add_option("--sweep-to", copt.sweep_to, "rate sweep end exponent");
    cex->add_option("--out-prefix", copt.out_prefix, "output file prefix");

    CLI::App* targets = app.add_subcommand("targets", "list the target catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (build->parsed()) return cmd_build(bopt);
        if (sim->parsed()) return cmd_simulate(sopt, false);
        if (tails->parsed()) return cmd_simulate(sopt, true);
        if (cex->parsed()) return cmd_counterexample(copt);
        if (targets->parsed()) return cmd_targets();
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const contract_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ladder_consistency_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const construction_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const range_violation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const empty_construction_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const precision_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
