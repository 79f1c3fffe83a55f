#ifndef COINSIM_SIMULATE_HPP
#define COINSIM_SIMULATE_HPP

// Exact stopping-time simulation of an f(p)-coin from a certified dyadic
// envelope ladder. At rung degree d, the 2^d C(d,k) equally likely
// (path, fair-bits) configurations in heads-class k are "units"; a stage
// table says how many units accept 1 (A), accept 0 (R) and continue (Cont).
// Steps between rungs use the canonical nested assignment: units whose
// prefix was decided inherit the decision; units with continuing prefixes
// are ordered lexicographically by (prefix heads, prefix continuing-rank,
// suffix path rank, suffix fair bits) and the first A_n(k') - Inherited1(k')
// of them accept 1, the last R_n(k') - Inherited0(k') accept 0. Certified
// consistency (iv) is exactly the statement Inherited1 <= A_n per class, so
// the counts below never go negative for certified input.

#include "bernstein.hpp"
#include "envelope.hpp"
#include "rational.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace coinsim {

struct contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ladder_consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- sources

class BitSource {
  public:
    virtual ~BitSource() = default;
    virtual bool next_bit() = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

class FairSource : public BitSource {
  public:
    explicit FairSource(std::uint64_t seed) : rng_(seed) {}
    bool next_bit() override {
        if (left_ == 0) {
            buf_ = rng_();
            left_ = 64;
        }
        bool b = buf_ & 1;
        buf_ >>= 1;
        --left_;
        return b;
    }

  private:
    std::mt19937_64 rng_;
    std::uint64_t buf_ = 0;
    int left_ = 0;
};

// i.i.d. Bernoulli(p) bits for exact rational p, by rejection sampling a
// uniform integer below the denominator.
class PCoinSource : public BitSource {
  public:
    PCoinSource(const Rational& p, std::uint64_t seed) : rng_(seed) {
        if (p < 0 || p > 1) throw std::domain_error("PCoinSource: p outside [0,1]");
        num_ = p.get_num();
        den_ = p.get_den();
        bits_ = mpz_sizeinbase(den_.get_mpz_t(), 2);
        if (den_ == 1) bits_ = 1;
    }

    bool next_bit() override {
        if (den_ == 1) return num_ == 1;
        while (true) {
            Integer x = draw_bits(bits_);
            if (x < den_) return x < num_;
        }
    }

  private:
    Integer draw_bits(unsigned long nbits) {
        Integer x(0);
        unsigned long got = 0;
        while (got < nbits) {
            unsigned long take = std::min<unsigned long>(64, nbits - got);
            std::uint64_t w = rng_();
            if (take < 64) w &= (1ULL << take) - 1;
            Integer chunk(static_cast<unsigned long>(w >> 32));
            chunk <<= 32;
            chunk += static_cast<unsigned long>(w & 0xFFFFFFFFULL);
            x <<= take;
            x += chunk;
            got += take;
        }
        return x;
    }

    Integer num_, den_;
    unsigned long bits_;
    std::mt19937_64 rng_;
};

class ReplaySource : public BitSource {
  public:
    explicit ReplaySource(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    bool next_bit() override {
        if (pos_ >= bits_.size()) throw contract_error("ReplaySource: bit stream exhausted");
        return bits_[pos_++] != 0;
    }
    std::size_t remaining() const { return bits_.size() - pos_; }

  private:
    std::vector<std::uint8_t> bits_;
    std::size_t pos_ = 0;
};

// ------------------------------------------------------------ stage tables

struct StageTable {
    unsigned level = 0;
    unsigned degree = 0;
    std::vector<Integer> accept1;  // A(k)    = 2^d C(d,k) a(d,k)
    std::vector<Integer> reject0;  // R(k)    = 2^d C(d,k) (1 - b(d,k))
    std::vector<Integer> cont;     // Cont(k) = 2^d C(d,k) (b - a)
    std::vector<Integer> total;    // 2^d C(d,k)
};

inline StageTable stage_table(const EnvelopePair& e) {
    StageTable st;
    st.level = e.level;
    st.degree = e.degree;
    std::vector<Integer> lo, hi;
    try {
        lo = detail::dyadic_mantissas(e.lower, e.degree);
        hi = detail::dyadic_mantissas(e.upper, e.degree);
    } catch (const std::invalid_argument& err) {
        throw contract_error(std::string("stage_table: ") + err.what());
    }
    Integer scale = pow2_int(e.degree);
    auto row = binomial_row(e.degree);
    st.accept1.resize(e.degree + 1);
    st.reject0.resize(e.degree + 1);
    st.cont.resize(e.degree + 1);
    st.total.resize(e.degree + 1);
    for (unsigned k = 0; k <= e.degree; ++k) {
        st.total[k] = (*row)[k] * scale;
        st.accept1[k] = lo[k];
        st.reject0[k] = st.total[k] - hi[k];
        st.cont[k] = hi[k] - lo[k];
        if (st.accept1[k] < 0 || st.reject0[k] < 0 || st.cont[k] < 0)
            throw contract_error("stage_table: negative unit count (uncertified input)");
    }
    return st;
}

inline std::vector<StageTable> stage_tables(const std::vector<EnvelopePair>& rungs) {
    std::vector<StageTable> out;
    out.reserve(rungs.size());
    for (const auto& e : rungs) out.push_back(stage_table(e));
    return out;
}

// Per consecutive rung pair: unit counts inherited from decided prefixes and
// the per-class first-come allocations for free units.
struct StepTable {
    unsigned from_degree = 0, to_degree = 0;
    std::vector<Integer> inherited1, inherited0, free_units, need1, need0;
    // prefix sums are computed on demand per replication; rows of C(s, .)
    std::shared_ptr<const std::vector<Integer>> suffix_binom;
};

inline StepTable make_step_table(const StageTable& from, const StageTable& to) {
    StepTable st;
    st.from_degree = from.degree;
    st.to_degree = to.degree;
    unsigned s = to.degree - from.degree;
    Integer pow2s = pow2_int(s);
    st.suffix_binom = binomial_row(s);
    std::vector<Integer> inh1 = elevate_units(from.accept1, from.degree, to.degree);
    std::vector<Integer> inh0 = elevate_units(from.reject0, from.degree, to.degree);
    std::vector<Integer> free = elevate_units(from.cont, from.degree, to.degree);
    st.inherited1.resize(to.degree + 1);
    st.inherited0.resize(to.degree + 1);
    st.free_units.resize(to.degree + 1);
    st.need1.resize(to.degree + 1);
    st.need0.resize(to.degree + 1);
    for (unsigned k = 0; k <= to.degree; ++k) {
        st.inherited1[k] = inh1[k] * pow2s;
        st.inherited0[k] = inh0[k] * pow2s;
        st.free_units[k] = free[k] * pow2s;
        st.need1[k] = to.accept1[k] - st.inherited1[k];
        st.need0[k] = to.reject0[k] - st.inherited0[k];
        if (st.need1[k] < 0 || st.need0[k] < 0)
            throw ladder_consistency_error(
                "step table: inherited units exceed stage allocation (consistency (iv) broken)");
    }
    return st;
}

// --------------------------------------------------------------- mechanics

// Colexicographic rank of a fixed-popcount bit string among all strings of
// the same length and popcount: sum over ones of C(position_t, t), computed
// with O(1) big-integer work per bit.
inline Integer colex_rank(const std::vector<std::uint8_t>& bits) {
    Integer rank(0);
    Integer cur(0);  // C(i, t+1) for position i, t = ones seen so far
    unsigned long t = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            rank += cur;
            // bump: C(i, t+2) = C(i, t+1) (i - t - 1) / (t + 2), zero for i < t+2
            if (i < t + 2) {
                cur = 0;
            } else {
                cur *= static_cast<unsigned long>(i - t - 1);
                mpz_divexact_ui(cur.get_mpz_t(), cur.get_mpz_t(), t + 2);
            }
            ++t;
        }
        // advance: C(i+1, t+1) from C(i, t+1)
        unsigned long j = t + 1;
        if (i + 1 < j) {
            cur = 0;
        } else if (i + 1 == j) {
            cur = 1;
        } else {
            cur *= static_cast<unsigned long>(i + 1);
            mpz_divexact_ui(cur.get_mpz_t(), cur.get_mpz_t(), static_cast<unsigned long>(i + 1 - j));
        }
    }
    return rank;
}

inline Integer bits_to_integer(const std::vector<std::uint8_t>& bits) {
    Integer x(0);
    for (std::size_t i = bits.size(); i-- > 0;) {
        x <<= 1;
        if (bits[i]) x += 1;
    }
    return x;
}

enum class StepKind { Accept1, Accept0, Continue };

struct SimulationState {
    unsigned stage = 0;  // stages completed
    unsigned heads = 0;
    Integer cont_rank;
    std::vector<std::uint8_t> pbits, fairbits;
};

// Base rung: unit index = path colex rank * 2^d + fair bits; accept-1 takes
// the initial segment, accept-0 the final one.
inline StepKind base_step(const StageTable& st, SimulationState& state,
                          const std::vector<std::uint8_t>& pbits,
                          const std::vector<std::uint8_t>& fairbits) {
    if (pbits.size() != st.degree || fairbits.size() != st.degree)
        throw std::invalid_argument("base_step: need degree-many bits from each coin");
    unsigned k = 0;
    for (auto b : pbits) k += b;
    Integer unit = colex_rank(pbits) * pow2_int(st.degree) + bits_to_integer(fairbits);
    state.heads = k;
    state.pbits = pbits;
    state.fairbits = fairbits;
    state.stage = 1;
    if (unit < st.accept1[k]) return StepKind::Accept1;
    if (unit >= st.total[k] - st.reject0[k]) return StepKind::Accept0;
    state.cont_rank = unit - st.accept1[k];
    return StepKind::Continue;
}

// The engine owns the precomputed tables and implements the canonical order.
class Simulator {
  public:
    explicit Simulator(const std::vector<EnvelopePair>& rungs) : stages_(stage_tables(rungs)) {
        init_steps();
    }
    explicit Simulator(std::vector<StageTable> stages) : stages_(std::move(stages)) {
        init_steps();
    }
    explicit Simulator(const EnvelopeLadder& ladder) : Simulator(ladder.rungs) {}

    const std::vector<StageTable>& stages() const { return stages_; }
    const std::vector<StepTable>& steps() const { return steps_; }

    StepKind advance(SimulationState& state, const std::vector<std::uint8_t>& pbits,
                     const std::vector<std::uint8_t>& fairbits) const {
        if (state.stage == 0) return base_step(stages_[0], state, pbits, fairbits);
        const StageTable& from = stages_[state.stage - 1];
        const StageTable& to = stages_[state.stage];
        const StepTable& tr = steps_[state.stage - 1];
        unsigned s = to.degree - from.degree;
        if (pbits.size() != s || fairbits.size() != s)
            throw std::invalid_argument("advance: bit counts must extend the path to the next rung");
        unsigned k2 = 0;
        for (auto b : pbits) k2 += b;
        unsigned kp = state.heads + k2;

        const auto& srow = *tr.suffix_binom;
        Integer offset(0);
        unsigned klo = kp > s ? kp - s : 0;
        for (unsigned kpp = klo; kpp < state.heads; ++kpp)
            offset += from.cont[kpp] * srow[kp - kpp];
        Integer free_rank = offset + state.cont_rank * srow[k2];
        free_rank += colex_rank(pbits);
        free_rank <<= s;
        // (offset + cont_rank C(s,k2) + suffix_rank) 2^s + fair suffix
        // note: offset must also be scaled by 2^s; fold it in before the shift
        free_rank += bits_to_integer(fairbits);

        state.heads = kp;
        state.stage += 1;
        state.pbits.insert(state.pbits.end(), pbits.begin(), pbits.end());
        state.fairbits.insert(state.fairbits.end(), fairbits.begin(), fairbits.end());

        if (free_rank < tr.need1[kp]) return StepKind::Accept1;
        if (free_rank >= tr.free_units[kp] - tr.need0[kp]) return StepKind::Accept0;
        state.cont_rank = free_rank - tr.need1[kp];
        return StepKind::Continue;
    }

  private:
    void init_steps() {
        if (stages_.empty()) throw std::invalid_argument("Simulator: empty ladder");
        for (std::size_t m = 0; m + 1 < stages_.size(); ++m)
            steps_.push_back(make_step_table(stages_[m], stages_[m + 1]));
    }

    std::vector<StageTable> stages_;
    std::vector<StepTable> steps_;
};

// ---------------------------------------------------------------- running

struct SimResult {
    enum class Outcome { One, Zero, Timeout } outcome = Outcome::Timeout;
    unsigned tosses = 0;       // N: degree of the deciding rung (or the last rung)
    unsigned stages_used = 0;  // rungs consumed
    std::vector<StepKind> transcript;
    std::vector<std::uint8_t> pbits, fairbits;
};

inline SimResult simulate(const Simulator& sim, BitSource& pcoin, BitSource& fair,
                          bool keep_bits = false) {
    SimulationState state;
    SimResult res;
    const auto& stages = sim.stages();
    for (std::size_t m = 0; m < stages.size(); ++m) {
        unsigned need = m == 0 ? stages[0].degree : stages[m].degree - stages[m - 1].degree;
        std::vector<std::uint8_t> pb(need), fb(need);
        for (unsigned i = 0; i < need; ++i) pb[i] = pcoin.next_bit() ? 1 : 0;
        for (unsigned i = 0; i < need; ++i) fb[i] = fair.next_bit() ? 1 : 0;
        StepKind kind = sim.advance(state, pb, fb);
        res.transcript.push_back(kind);
        res.stages_used = static_cast<unsigned>(m + 1);
        res.tosses = stages[m].degree;
        if (kind == StepKind::Accept1 || kind == StepKind::Accept0) {
            res.outcome = kind == StepKind::Accept1 ? SimResult::Outcome::One
                                                    : SimResult::Outcome::Zero;
            break;
        }
    }
    if (keep_bits) {
        res.pbits = state.pbits;
        res.fairbits = state.fairbits;
    }
    return res;
}

// ------------------------------------------------------------- tail stats

inline std::pair<double, double> wilson_interval(unsigned long count, unsigned long n, double z) {
    if (n == 0) return {0.0, 1.0};
    double phat = static_cast<double>(count) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct TailCurve {
    Rational p;
    unsigned long replications = 0;
    std::vector<unsigned long> survivors;  // per stage: replications with N > degree
    unsigned long ones = 0, zeros = 0, timeouts = 0;
    double slope_loglog = 0.0;  // fit of log survival vs log degree
    bool slope_valid = false;
};

struct TailStats {
    std::uint64_t seed = 0;
    std::vector<unsigned> degrees;
    std::vector<TailCurve> curves;
};

inline double fit_loglog_slope(const std::vector<unsigned>& degrees,
                               const std::vector<double>& values) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (values[i] <= 0) continue;
        double x = std::log(static_cast<double>(degrees[i]));
        double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline TailStats monte_carlo_tails(const Simulator& sim, const std::vector<Rational>& ps,
                                   unsigned long replications, std::uint64_t seed,
                                   unsigned threads = 1) {
    TailStats stats;
    stats.seed = seed;
    for (const auto& st : sim.stages()) stats.degrees.push_back(st.degree);
    const std::size_t nstages = sim.stages().size();

    for (const auto& p : ps) {
        TailCurve curve;
        curve.p = p;
        curve.replications = replications;
        curve.survivors.assign(nstages, 0);

        struct Local {
            std::vector<unsigned long> survivors;
            unsigned long ones = 0, zeros = 0, timeouts = 0;
        };
        unsigned nthreads = std::max(1u, threads);
        std::vector<Local> locals(nthreads);
        for (auto& l : locals) l.survivors.assign(nstages, 0);

        auto worker = [&](unsigned tid) {
            Local& local = locals[tid];
            for (unsigned long rep = tid; rep < replications; rep += nthreads) {
                std::uint64_t state = seed + 0x9E3779B97F4A7C15ULL * (rep + 1);
                std::uint64_t s1 = detail::splitmix64(state);
                std::uint64_t s2 = detail::splitmix64(state);
                PCoinSource pc(p, s1);
                FairSource fc(s2);
                SimResult r = simulate(sim, pc, fc);
                unsigned undecided_until =
                    r.outcome == SimResult::Outcome::Timeout ? static_cast<unsigned>(nstages)
                                                             : r.stages_used - 1;
                for (unsigned m = 0; m < undecided_until && m < nstages; ++m)
                    local.survivors[m] += 1;
                switch (r.outcome) {
                    case SimResult::Outcome::One: local.ones += 1; break;
                    case SimResult::Outcome::Zero: local.zeros += 1; break;
                    case SimResult::Outcome::Timeout: local.timeouts += 1; break;
                }
            }
        };
        if (nthreads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        for (const auto& l : locals) {
            curve.ones += l.ones;
            curve.zeros += l.zeros;
            curve.timeouts += l.timeouts;
            for (std::size_t m = 0; m < nstages; ++m) curve.survivors[m] += l.survivors[m];
        }
        if (replications > 0) {
            std::vector<double> sv;
            for (auto c : curve.survivors) sv.push_back(static_cast<double>(c) / replications);
            curve.slope_loglog = fit_loglog_slope(stats.degrees, sv);
            curve.slope_valid = true;
        }
        stats.curves.push_back(std::move(curve));
    }
    return stats;
}

// ------------------------------------------------------ exhaustive oracle

// Enumerates every (path, fair-bits) configuration of a 1- or 2-stage ladder
// and drives the engine on each; verifies that per-class decision counts
// equal the stage tables exactly, that decisions nest across stages, and
// that inherited counts match the closed form.
struct ExhaustiveReport {
    bool counts_match = true;
    bool nesting_ok = true;
    bool inherit_match = true;
    std::vector<std::vector<unsigned long>> accept1, accept0, cont;  // per stage, per class
    std::string detail;

    bool ok() const { return counts_match && nesting_ok && inherit_match; }
};

inline std::vector<std::uint8_t> index_to_bits(unsigned long idx, unsigned width) {
    std::vector<std::uint8_t> bits(width);
    for (unsigned i = 0; i < width; ++i) bits[i] = (idx >> i) & 1;
    return bits;
}

inline ExhaustiveReport exhaustive_oracle(const Simulator& sim) {
    const auto& stages = sim.stages();
    if (stages.size() > 2 || stages.back().degree > 12)
        throw std::invalid_argument("exhaustive_oracle: supports <= 2 rungs with degree <= 12");
    ExhaustiveReport rep;
    unsigned d0 = stages[0].degree;
    rep.accept1.assign(stages.size(), {});
    rep.accept0.assign(stages.size(), {});
    rep.cont.assign(stages.size(), {});
    for (std::size_t m = 0; m < stages.size(); ++m) {
        rep.accept1[m].assign(stages[m].degree + 1, 0);
        rep.accept0[m].assign(stages[m].degree + 1, 0);
        rep.cont[m].assign(stages[m].degree + 1, 0);
    }

    struct Pending {
        SimulationState state;
    };
    std::vector<Pending> continuing;
    std::vector<std::pair<unsigned, StepKind>> decided_stage0;  // heads class, kind

    for (unsigned long path = 0; path < (1UL << d0); ++path) {
        for (unsigned long fair = 0; fair < (1UL << d0); ++fair) {
            SimulationState st;
            auto pb = index_to_bits(path, d0);
            auto fb = index_to_bits(fair, d0);
            StepKind kind = sim.advance(st, pb, fb);
            unsigned k = st.heads;
            if (kind == StepKind::Accept1) rep.accept1[0][k] += 1;
            else if (kind == StepKind::Accept0) rep.accept0[0][k] += 1;
            else {
                rep.cont[0][k] += 1;
                continuing.push_back({st});
            }
            if (stages.size() == 2 && kind != StepKind::Continue)
                decided_stage0.push_back({k, kind});
        }
    }

    auto check_stage = [&](std::size_t m) {
        for (unsigned k = 0; k <= stages[m].degree; ++k) {
            if (Integer(static_cast<unsigned long>(rep.accept1[m][k])) != stages[m].accept1[k] ||
                Integer(static_cast<unsigned long>(rep.accept0[m][k])) != stages[m].reject0[k] ||
                Integer(static_cast<unsigned long>(rep.cont[m][k])) != stages[m].cont[k]) {
                rep.counts_match = false;
                rep.detail = "stage " + std::to_string(m) + " class " + std::to_string(k) +
                             ": enumerated counts differ from stage table";
            }
        }
    };
    check_stage(0);
    if (stages.size() == 1) return rep;

    unsigned d1 = stages[1].degree;
    unsigned s = d1 - d0;
    const StepTable& tr = sim.steps()[0];

    // inherited units, counted directly from decided prefixes
    std::vector<unsigned long> inh1(d1 + 1, 0), inh0(d1 + 1, 0);
    for (auto [k, kind] : decided_stage0) {
        for (unsigned long sp = 0; sp < (1UL << s); ++sp) {
            unsigned k2 = 0;
            for (unsigned i = 0; i < s; ++i) k2 += (sp >> i) & 1;
            unsigned long count = 1UL << s;  // fair suffixes
            if (kind == StepKind::Accept1) {
                inh1[k + k2] += count;
                rep.accept1[1][k + k2] += count;
            } else {
                inh0[k + k2] += count;
                rep.accept0[1][k + k2] += count;
            }
        }
    }
    for (unsigned k = 0; k <= d1; ++k) {
        if (Integer(static_cast<unsigned long>(inh1[k])) != tr.inherited1[k] ||
            Integer(static_cast<unsigned long>(inh0[k])) != tr.inherited0[k]) {
            rep.inherit_match = false;
            rep.detail = "inherited counts differ from closed form at class " + std::to_string(k);
        }
    }

    // extensions of continuing prefixes
    for (const auto& pend : continuing) {
        for (unsigned long sp = 0; sp < (1UL << s); ++sp) {
            for (unsigned long sf = 0; sf < (1UL << s); ++sf) {
                SimulationState st = pend.state;
                StepKind kind = sim.advance(st, index_to_bits(sp, s), index_to_bits(sf, s));
                unsigned k = st.heads;
                if (kind == StepKind::Accept1) rep.accept1[1][k] += 1;
                else if (kind == StepKind::Accept0) rep.accept0[1][k] += 1;
                else rep.cont[1][k] += 1;
            }
        }
    }
    check_stage(1);
    return rep;
}

}  // namespace coinsim

#endif
