#include "stegokit/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "stegokit/errors.hpp"
#include "stegokit/extractor.hpp"
#include "stegokit/sampling.hpp"

namespace stegokit {

SecurityBound security_bound(const ParamSet& params) {
    params.validate();
    double eps = params.eps_sec;
    double v = params.ell * (std::sqrt(eps) + 2.0 * std::pow(eps, 0.25));
    return SecurityBound{v, v > 1.0};
}

double soundness_bound(const ParamSet& params) {
    params.validate();
    double eps = params.eps_sec;
    double quarter = std::pow(eps, 0.25);
    double base = 1.0 - (std::ldexp(1.0, -params.block_bits) - std::sqrt(eps));
    base = std::clamp(base, 0.0, 1.0);
    double per_block = (1.0 - quarter) * std::pow(base, static_cast<double>(params.rho)) +
                       quarter + params.ell * quarter;
    return params.ell * per_block;
}

double soundness_bound_c4(int nu) {
    if (nu < 2)
        throw input_error("message length must be >= 2");
    double lg = std::log2(static_cast<double>(nu));
    double s2 = std::sqrt(2.0);
    double n = nu;
    return 1.0 / (4.0 * n * n * n * lg) + 1.0 / (4.0 * s2 * n * lg) +
           1.0 / (16.0 * s2 * lg * lg);
}

double rho0_failure_exact(const ParamSet& params) {
    params.validate();
    return 1.0 - std::ldexp(1.0, -params.nu);
}

namespace {

void check_channel_fits(const ParamSet& params, const ChannelModel& c) {
    if (c.bits_per_symbol() != params.b)
        throw mismatch_error("channel symbol width does not match parameters");
    if (c.declared_min_entropy() + 1e-9 < params.delta)
        throw mismatch_error("channel min-entropy is below the parameter requirement");
}

mpz_class mpz_from_u128(unsigned __int128 v) {
    mpz_class hi(static_cast<unsigned long>(v >> 64));
    return (hi << 64) + static_cast<unsigned long>(v);
}

// Seed-independent data for one channel context: exact block marginal,
// successor context per block, and (when denominators allow) the marginal as
// 128-bit integer numerators over one common denominator, so that per-seed
// aggregation is pure integer arithmetic.
struct CtxTable {
    History ctx;
    std::vector<Rat> mass;
    std::vector<int> succ;
    bool fast = false;
    mpz_class den;
    std::vector<unsigned __int128> num;
};

struct Instance {
    const ChannelModel* channel = nullptr;
    ParamSet params;
    History start;
    int init_ctx = 0;
    std::uint64_t blocks = 0;
    std::vector<CtxTable> ctx;
    std::vector<std::uint64_t> xbits; // block index -> extractor input bits
};

Instance build_instance(const ParamSet& p, const ChannelModel& c, const History& h) {
    p.validate();
    check_channel_fits(p, c);
    int n = p.extractor.n;
    if (n > 16)
        throw cap_error("transcript enumeration too large: t*b above 16");
    if (p.block_bits > 14)
        throw cap_error("transcript enumeration too large: block payload above 14 bits");

    Instance inst;
    inst.channel = &c;
    inst.params = p;
    inst.start = h;
    inst.blocks = std::uint64_t(1) << n;

    inst.xbits.resize(inst.blocks);
    for (std::uint64_t idx = 0; idx < inst.blocks; ++idx) {
        std::vector<int> syms = block_symbols(idx, p.t, c.alphabet_size());
        std::uint64_t x = 0;
        for (int i = 0; i < p.t; ++i)
            for (int u = 0; u < p.b; ++u)
                if ((syms[i] >> u) & 1)
                    x |= std::uint64_t(1) << (i * p.b + u);
        inst.xbits[idx] = x;
    }

    std::map<History, int> ids;
    std::vector<History> order;
    auto intern = [&](const History& ctx) {
        auto it = ids.find(ctx);
        if (it != ids.end())
            return it->second;
        int id = static_cast<int>(order.size());
        ids.emplace(ctx, id);
        order.push_back(ctx);
        return id;
    };
    inst.init_ctx = intern(c.context_of(h));
    for (std::size_t qi = 0; qi < order.size(); ++qi) {
        if (order.size() > 64)
            throw cap_error("too many channel contexts to enumerate");
        History ctx = order[qi];
        CtxTable tab;
        tab.ctx = ctx;
        tab.mass = c.marginal_block(ctx, p.t, inst.blocks).dist.mass;
        tab.succ.resize(inst.blocks);
        for (std::uint64_t idx = 0; idx < inst.blocks; ++idx) {
            History next = ctx;
            std::vector<int> syms = block_symbols(idx, p.t, c.alphabet_size());
            next.insert(next.end(), syms.begin(), syms.end());
            tab.succ[idx] = intern(c.context_of(next));
        }
        mpz_class den = 1;
        for (const Rat& m : tab.mass)
            mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), m.get_den().get_mpz_t());
        if (mpz_sizeinbase(den.get_mpz_t(), 2) <= 120) {
            tab.fast = true;
            tab.den = den;
            tab.num.resize(inst.blocks);
            for (std::uint64_t idx = 0; idx < inst.blocks; ++idx) {
                mpz_class scaled = tab.mass[idx].get_num() * (den / tab.mass[idx].get_den());
                mpz_class hi = scaled >> 64;
                mpz_class lo = scaled - (hi << 64);
                tab.num[idx] = (static_cast<unsigned __int128>(hi.get_ui()) << 64) |
                               static_cast<unsigned __int128>(lo.get_ui());
            }
        }
        inst.ctx.push_back(std::move(tab));
    }

    double leaves = std::pow(std::ldexp(1.0, p.block_bits) * inst.ctx.size(),
                             static_cast<double>(p.ell));
    if (leaves > 2e7)
        throw cap_error("transcript class enumeration too large");
    return inst;
}

// Per-seed view: block classification under the seeded extractor, and per
// context the pushforward, retry weights, and class transition masses.
struct SeedTables {
    std::vector<std::uint16_t> yclass;
    std::vector<std::vector<Rat>> push;      // [ctx][y]
    std::vector<std::vector<Rat>> accept;    // [ctx][y]
    std::vector<std::vector<Rat>> final_w;   // [ctx][y]
    std::vector<std::vector<Rat>> trans;     // [ctx][y * nctx + ctx2]
    std::vector<std::vector<Rat>> mix;       // [block i][ctx]: sum_m u_i(m) final_w
};

// Payload bits actually carried by block i (the rest are padding).
int active_bits(const ParamSet& p, int block) {
    return std::min(p.block_bits, p.nu - block * p.block_bits);
}

SeedTables build_seed_tables(const Instance& inst, const BitVec& seed) {
    const ParamSet& p = inst.params;
    if (static_cast<int>(seed.size()) != p.extractor.d)
        throw input_error("seed length does not match parameters");
    std::uint64_t seed_bits = seed.to_u64(); // d <= n + block_bits - 1 <= 29 under caps
    int nctx = static_cast<int>(inst.ctx.size());
    std::uint64_t ny = std::uint64_t(1) << p.block_bits;

    SeedTables st;
    st.yclass.resize(inst.blocks);
    for (std::uint64_t idx = 0; idx < inst.blocks; ++idx)
        st.yclass[idx] =
            static_cast<std::uint16_t>(extract_u64(p.extractor, seed_bits, inst.xbits[idx]));

    st.push.assign(nctx, std::vector<Rat>(ny));
    st.accept.assign(nctx, std::vector<Rat>(ny));
    st.final_w.assign(nctx, std::vector<Rat>(ny));
    st.trans.assign(nctx, std::vector<Rat>(ny * nctx));
    for (int cid = 0; cid < nctx; ++cid) {
        const CtxTable& tab = inst.ctx[cid];
        if (tab.fast) {
            std::vector<unsigned __int128> pnum(ny, 0);
            std::vector<unsigned __int128> tnum(ny * nctx, 0);
            for (std::uint64_t idx = 0; idx < inst.blocks; ++idx) {
                std::uint64_t y = st.yclass[idx];
                pnum[y] += tab.num[idx];
                tnum[y * nctx + tab.succ[idx]] += tab.num[idx];
            }
            for (std::uint64_t y = 0; y < ny; ++y) {
                st.push[cid][y] = Rat(mpz_from_u128(pnum[y]), tab.den);
                st.push[cid][y].canonicalize();
                for (int c2 = 0; c2 < nctx; ++c2) {
                    if (tnum[y * nctx + c2] == 0)
                        continue;
                    Rat& tr = st.trans[cid][y * nctx + c2];
                    tr = Rat(mpz_from_u128(tnum[y * nctx + c2]), tab.den);
                    tr.canonicalize();
                }
            }
        } else {
            for (std::uint64_t idx = 0; idx < inst.blocks; ++idx) {
                std::uint64_t y = st.yclass[idx];
                st.push[cid][y] += tab.mass[idx];
                st.trans[cid][y * nctx + tab.succ[idx]] += tab.mass[idx];
            }
        }
        for (std::uint64_t y = 0; y < ny; ++y) {
            RejSamWeights w = rejsam_weights(st.push[cid][y], p.rho);
            st.accept[cid][y] = w.accept;
            st.final_w[cid][y] = w.final_weight;
        }
    }

    st.mix.assign(p.ell, std::vector<Rat>(nctx));
    for (int i = 0; i < p.ell; ++i) {
        int r = active_bits(p, i);
        Rat u = rat_dyadic(1, static_cast<unsigned>(r));
        for (int cid = 0; cid < nctx; ++cid) {
            Rat sum = 0;
            for (std::uint64_t m = 0; m < (std::uint64_t(1) << r); ++m)
                sum += st.final_w[cid][m];
            st.mix[i][cid] = u * sum;
        }
    }
    return st;
}

// Mass ratio of the embedder's block output to the covertext marginal when
// block i lands in class y under context cid.
Rat class_ratio(const Instance& inst, const SeedTables& st, int i, int cid, std::uint64_t y) {
    int r = active_bits(inst.params, i);
    Rat g = st.mix[i][cid];
    if (y < (std::uint64_t(1) << r))
        g += rat_dyadic(1, static_cast<unsigned>(r)) * st.accept[cid][y];
    return g;
}

Rat seed_distance(const Instance& inst, const SeedTables& st) {
    const ParamSet& p = inst.params;
    int nctx = static_cast<int>(inst.ctx.size());
    std::uint64_t ny = std::uint64_t(1) << p.block_bits;
    Rat acc = 0;
    // Depth-first walk over class sequences: weight is the covertext mass of
    // the class, ratio the accumulated embedder-to-covertext mass ratio.
    auto walk = [&](auto&& self, int i, int cid, const Rat& weight, const Rat& ratio) -> void {
        if (i == p.ell) {
            Rat diff(ratio - 1);
            acc += weight * (diff < 0 ? Rat(-diff) : diff);
            return;
        }
        for (std::uint64_t y = 0; y < ny; ++y) {
            Rat g = class_ratio(inst, st, i, cid, y);
            for (int c2 = 0; c2 < nctx; ++c2) {
                const Rat& tr = st.trans[cid][y * nctx + c2];
                if (tr == 0)
                    continue;
                self(self, i + 1, c2, Rat(weight * tr), Rat(ratio * g));
            }
        }
    };
    walk(walk, 0, inst.init_ctx, Rat(1), Rat(1));
    return Rat(acc / 2);
}

} // namespace

Rat exact_stego_distance(const ParamSet& params, const BitVec& seed, const ChannelModel& c,
                         const History& h) {
    Instance inst = build_instance(params, c, h);
    SeedTables st = build_seed_tables(inst, seed);
    return seed_distance(inst, st);
}

DistanceEstimate seed_averaged_stego_distance(const ParamSet& params, const ChannelModel& c,
                                              const History& h, std::mt19937_64& rng,
                                              int max_enum_log2_seeds,
                                              std::uint64_t sample_seeds) {
    Instance inst = build_instance(params, c, h);
    int d = params.extractor.d;
    DistanceEstimate est;
    if (d <= max_enum_log2_seeds) {
        std::uint64_t total = std::uint64_t(1) << d;
        Rat sum = 0;
        for (std::uint64_t s = 0; s < total; ++s)
            sum += seed_distance(inst, build_seed_tables(inst, BitVec::from_u64(s, d)));
        est.value = sum * rat_dyadic(1, static_cast<unsigned>(d));
        est.exact = true;
        est.seeds_used = total;
        est.ci_halfwidth = 0;
        return est;
    }
    if (sample_seeds < 2)
        throw input_error("sampled seed estimate needs at least 2 seeds");
    double mean = 0, m2 = 0;
    for (std::uint64_t i = 0; i < sample_seeds; ++i) {
        BitVec seed = BitVec::random(d, rng);
        double v = rat_to_double(seed_distance(inst, build_seed_tables(inst, seed)));
        double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    double var = m2 / static_cast<double>(sample_seeds - 1);
    est.value = Rat(mean);
    est.exact = false;
    est.seeds_used = sample_seeds;
    est.ci_halfwidth = 1.96 * std::sqrt(std::max(var, 0.0) / static_cast<double>(sample_seeds));
    return est;
}

SoundnessReport measure_soundness(const ParamSet& params, const ChannelModel& c,
                                  std::uint64_t trials, std::mt19937_64& rng) {
    params.validate();
    check_channel_fits(params, c);
    if (trials < 1)
        throw input_error("trials must be >= 1");
    std::uint64_t failures = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        StegoKey key = keygen(params, rng);
        BitVec message = BitVec::random(params.nu, rng);
        History h;
        Stegotext st = se_encode(key, message, c, h, rng);
        if (sd_decode(key, st) != message)
            ++failures;
    }
    SoundnessReport r;
    r.trials = trials;
    r.failures = failures;
    r.measured = static_cast<double>(failures) / static_cast<double>(trials);
    r.bound = soundness_bound(params);
    r.sigma = std::sqrt(r.measured * (1.0 - r.measured) / static_cast<double>(trials));
    r.pass = r.measured <= r.bound + 3.0 * r.sigma;
    return r;
}

namespace {

class RandomAdversary final : public WardenAdversary {
  public:
    WardenChoice choose(const ParamSet& params, const ChannelModel&, std::mt19937_64&) override {
        WardenChoice ch;
        ch.message = BitVec(params.nu);
        return ch;
    }
    bool guess_stego(const StegoKey&, const ChannelModel&, const History&,
                     const std::vector<int>&, std::mt19937_64& rng) override {
        return rng() & 1;
    }
};

// Exact Neyman-Pearson test on the transcript, reading only the public seed:
// guess embedder iff the embedder-to-covertext mass ratio exceeds 1.
class LikelihoodAdversary final : public WardenAdversary {
  public:
    WardenChoice choose(const ParamSet& params, const ChannelModel&, std::mt19937_64&) override {
        WardenChoice ch;
        ch.message = BitVec(params.nu);
        return ch;
    }
    bool guess_stego(const StegoKey& key, const ChannelModel& c, const History& h,
                     const std::vector<int>& transcript, std::mt19937_64&) override {
        // The cached tables are only reusable for the same channel object,
        // start history, and parameter shape; the seed varies per trial.
        const ParamSet& kp = key.params;
        if (!inst_ || inst_->channel != &c || inst_->start != h ||
            inst_->params.nu != kp.nu || inst_->params.t != kp.t ||
            inst_->params.ell != kp.ell || inst_->params.block_bits != kp.block_bits ||
            inst_->params.rho != kp.rho || inst_->params.extractor.d != kp.extractor.d) {
            inst_ = std::make_unique<Instance>(build_instance(key.params, c, h));
            cache_.clear();
        }
        const Instance& inst = *inst_;
        const ParamSet& p = inst.params;
        std::uint64_t seed_bits = key.seed.to_u64();
        auto it = cache_.find(seed_bits);
        if (it == cache_.end())
            it = cache_.emplace(seed_bits, build_seed_tables(inst, key.seed)).first;
        const SeedTables& st = it->second;

        int nctx = static_cast<int>(inst.ctx.size());
        (void)nctx;
        Rat ratio = 1;
        int cid = inst.init_ctx;
        for (int i = 0; i < p.ell; ++i) {
            std::vector<int> syms(transcript.begin() + static_cast<std::size_t>(i) * p.t,
                                  transcript.begin() + static_cast<std::size_t>(i + 1) * p.t);
            std::uint64_t idx = block_index(syms, c.alphabet_size());
            ratio *= class_ratio(inst, st, i, cid, st.yclass[idx]);
            cid = inst.ctx[cid].succ[idx];
        }
        return ratio > 1;
    }

  private:
    std::unique_ptr<Instance> inst_;
    std::map<std::uint64_t, SeedTables> cache_;
};

// Out-of-model reference: decode with the full key and bet on an exact match.
class KeyInformedAdversary final : public WardenAdversary {
  public:
    WardenChoice choose(const ParamSet& params, const ChannelModel&,
                        std::mt19937_64& rng) override {
        WardenChoice ch;
        ch.message = BitVec::random(params.nu, rng);
        message_ = ch.message;
        return ch;
    }
    bool guess_stego(const StegoKey& key, const ChannelModel&, const History&,
                     const std::vector<int>& transcript, std::mt19937_64&) override {
        Stegotext st;
        st.symbols = transcript;
        st.ell = key.params.ell;
        st.t = key.params.t;
        return sd_decode(key, st) == message_;
    }

  private:
    BitVec message_;
};

} // namespace

std::unique_ptr<WardenAdversary> make_random_adversary() {
    return std::make_unique<RandomAdversary>();
}

std::unique_ptr<WardenAdversary> make_likelihood_adversary() {
    return std::make_unique<LikelihoodAdversary>();
}

std::unique_ptr<WardenAdversary> make_key_informed_adversary() {
    return std::make_unique<KeyInformedAdversary>();
}

GameResult run_warden_game(const ParamSet& params, const ChannelModel& c,
                           WardenAdversary& adversary, std::uint64_t trials,
                           std::mt19937_64& rng) {
    params.validate();
    check_channel_fits(params, c);
    if (trials < 1)
        throw input_error("trials must be >= 1");
    std::uint64_t lambda = static_cast<std::uint64_t>(params.total_symbols());
    std::uint64_t successes = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        StegoKey key = keygen(params, rng);
        WardenChoice ch = adversary.choose(params, c, rng);
        if (ch.message.size() != static_cast<std::size_t>(params.nu))
            throw input_error("adversary message length mismatch");
        bool coin_stego = rng() & 1;
        std::vector<int> transcript;
        if (coin_stego) {
            History h = ch.history;
            transcript = se_encode(key, ch.message, c, h, rng).symbols;
        } else {
            History h = ch.history;
            transcript.reserve(lambda);
            for (std::uint64_t j = 0; j < lambda; ++j) {
                int s = c.sample(h, rng);
                transcript.push_back(s);
                h.push_back(s);
            }
        }
        bool guess = adversary.guess_stego(key, c, ch.history, transcript, rng);
        if (guess == coin_stego)
            ++successes;
    }
    GameResult g;
    g.trials = trials;
    g.successes = successes;
    double rate = static_cast<double>(successes) / static_cast<double>(trials);
    g.advantage_estimate = std::fabs(rate - 0.5);
    g.confidence_halfwidth =
        1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
    return g;
}

std::string render_report(const std::string& kind, const std::string& instance,
                          double measured, double bound, bool pass, std::uint64_t trials,
                          double runtime_seconds,
                          const std::map<std::string, std::string>& extra) {
    nlohmann::json j;
    j["kind"] = kind;
    j["instance"] = instance;
    j["measured"] = measured;
    j["bound"] = bound;
    j["pass"] = pass;
    j["trials"] = trials;
    j["runtime_seconds"] = runtime_seconds;
    for (const auto& [k, v] : extra)
        j[k] = v;
    return j.dump(2) + "\n";
}

} // namespace stegokit
