#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <json.hpp>

#include "stegokit/analysis.hpp"
#include "stegokit/errors.hpp"
#include "stegokit/sampling.hpp"

using namespace stegokit;

namespace {

// Independent oracle: enumerate every transcript path directly, marginalizing
// the per-block targets (uniform over each block's active payload bits), and
// take total variation against the chained covertext marginal. No class
// grouping, no shared code with the production enumerator beyond the
// single-block closed form.
Rat brute_force_distance(const ParamSet& p, const BitVec& seed, const ChannelModel& c,
                         const History& h0) {
    BlockMap f = extractor_block_map(p, seed);
    const int a = c.alphabet_size();
    std::uint64_t per_block = 1;
    for (int i = 0; i < p.t; ++i)
        per_block *= a;
    std::uint64_t leaves = 1;
    for (int i = 0; i < p.ell; ++i)
        leaves *= per_block;
    std::vector<Rat> stego(leaves);

    std::function<void(int, const History&, const Rat&, std::uint64_t)> rec =
        [&](int blk, const History& h, const Rat& prob, std::uint64_t idx) {
            if (blk == p.ell) {
                stego[idx] += prob;
                return;
            }
            int active = std::min(p.block_bits, p.nu - blk * p.block_bits);
            Rat target_w = rat_dyadic(1, static_cast<unsigned>(active));
            RejSamConfig cfg{p.rho, p.t, p.block_bits};
            for (std::uint64_t y = 0; y < (std::uint64_t(1) << active); ++y) {
                BlockDistribution out = rejsam_exact_distribution(cfg, y, c, h, f);
                for (std::uint64_t bi = 0; bi < out.dist.size(); ++bi) {
                    if (out.dist.mass[bi] == 0)
                        continue;
                    std::vector<int> syms = block_symbols(bi, p.t, a);
                    History h2 = h;
                    h2.insert(h2.end(), syms.begin(), syms.end());
                    rec(blk + 1, h2, Rat(prob * target_w * out.dist.mass[bi]),
                        idx * per_block + bi);
                }
            }
        };
    rec(0, h0, Rat(1), 0);

    BlockDistribution cover = c.marginal_block(h0, p.ell * p.t);
    Rat acc(0);
    for (std::uint64_t i = 0; i < leaves; ++i) {
        Rat diff(stego[i] - cover.dist.mass[i]);
        acc += diff < 0 ? Rat(-diff) : diff;
    }
    return Rat(acc / 2);
}

void check_all_seeds(const ParamSet& p, const ChannelModel& c, const History& h0) {
    for (std::uint64_t s = 0; s < (std::uint64_t(1) << p.extractor.d); ++s) {
        BitVec seed = BitVec::from_u64(s, p.extractor.d);
        CHECK(exact_stego_distance(p, seed, c, h0) == brute_force_distance(p, seed, c, h0));
    }
}

} // namespace

TEST_CASE("security bound closed form") {
    ParamSet p = derive_params(16, 1, 1.0, 1, std::pow(2.0, -16), 1); // ell=4
    SecurityBound b = security_bound(p);
    CHECK(b.value == 0.515625); // 4 * (2^-8 + 2 * 2^-4), exact in binary
    CHECK_FALSE(b.vacuous);

    ParamSet loose = derive_params(2, 1, 1.0, 1, 0.0625, 8); // ell=2
    SecurityBound v = security_bound(loose);
    CHECK(v.value == 2.5);
    CHECK(v.vacuous);
}

TEST_CASE("soundness bound, general form and c=4 closed form") {
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8);
    CHECK(soundness_bound(p) == doctest::Approx(3.1001129150390625).epsilon(1e-14));
    CHECK(soundness_bound_c4(16) == doctest::Approx(0.005539530517082402).epsilon(1e-13));
    CHECK(soundness_bound_c4(256) == doctest::Approx(0.000776852574397948).epsilon(1e-13));
    // defaults at c=4 satisfy their own closed form
    ParamSet q = derive_params(16, 4, 1.0, 1);
    CHECK(soundness_bound(q) <= soundness_bound_c4(16));
}

TEST_CASE("no-retry failure rate is one minus two to the minus nu") {
    CHECK(rho0_failure_exact(derive_params(8, 1, 1.0, 1)) == 0.99609375);
    CHECK(rho0_failure_exact(derive_params(2, 1, 1.0, 1, 0.0625, 8)) == 0.75);
}

TEST_CASE("transcript distance is exactly zero on the uniform channel") {
    // linear block map + uniform channel: every seed, even rank-deficient
    // ones, reproduces covertext exactly when no block is padded
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8); // t=9, d=9
    for (std::uint64_t s : {0ull, 1ull, 37ull, 511ull, 256ull}) {
        BitVec seed = BitVec::from_u64(s, p.extractor.d);
        CHECK(exact_stego_distance(p, seed, c, {}) == Rat(0));
    }
}

TEST_CASE("enumerator agrees with brute-force paths: biased memoryless") {
    ChannelModel c = ChannelModel::load_file("data/binary_biased.json");
    ParamSet p = derive_params(2, 1, 0.51, 1, std::pow(2.0, -0.25), 2); // t=4, d=4
    REQUIRE(p.t == 4);
    REQUIRE(p.extractor.d == 4);
    check_all_seeds(p, c, {});
}

TEST_CASE("enumerator agrees with brute-force paths: markov with history") {
    ChannelModel c = ChannelModel::load_file("data/markov_ab.json");
    ParamSet p = derive_params(2, 1, 0.7, 1, std::pow(2.0, -0.25), 1); // t=3, d=3
    REQUIRE(p.t == 3);
    check_all_seeds(p, c, {});
    check_all_seeds(p, c, {1});
    check_all_seeds(p, c, {0, 1});
}

TEST_CASE("enumerator agrees with brute-force paths: padded final block") {
    ChannelModel u = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(3, 1, 1.0, 1, std::pow(2.0, -0.5), 2); // eta=2, ell=2, t=3
    REQUIRE(p.block_bits == 2);
    REQUIRE(p.ell == 2);
    check_all_seeds(p, u, {});
    // padding forces a strictly positive distance even here: the final
    // block's target only ranges over the active bit, skewing the mixture
    BitVec seed = BitVec::from_u64(0b1011, p.extractor.d);
    CHECK(exact_stego_distance(p, seed, u, {}) > Rat(0));
}

TEST_CASE("seed-averaged distance enumerates small seed spaces exactly") {
    ChannelModel c = ChannelModel::load_file("data/binary_biased.json");
    ParamSet p = derive_params(2, 1, 0.51, 1, std::pow(2.0, -0.25), 2);
    std::mt19937_64 rng(3);
    DistanceEstimate est = seed_averaged_stego_distance(p, c, {}, rng);
    CHECK(est.exact);
    CHECK(est.seeds_used == 16);
    CHECK(est.ci_halfwidth == 0.0);
    Rat mean(0);
    for (std::uint64_t s = 0; s < 16; ++s)
        mean += exact_stego_distance(p, BitVec::from_u64(s, 4), c, {});
    mean /= 16;
    CHECK(est.value == mean);
    CHECK(est.value > Rat(0));
}

TEST_CASE("seed-averaged distance falls back to sampling when asked") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8); // d=9
    std::mt19937_64 rng(5);
    DistanceEstimate est = seed_averaged_stego_distance(p, c, {}, rng, 3, 64);
    CHECK_FALSE(est.exact);
    CHECK(est.seeds_used == 64);
    CHECK(est.value == Rat(0)); // every sampled seed is exact zero here
    CHECK(est.ci_halfwidth == 0.0);
}

TEST_CASE("transcript enumeration trips its caps on big instances") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(16, 1, 1.0, 1); // t = 24 symbols per block
    BitVec seed(p.extractor.d);
    CHECK_THROWS_AS(exact_stego_distance(p, seed, c, {}), cap_error);
}

TEST_CASE("monte carlo soundness: healthy instance never strays far") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(4, 1, 1.0, 1); // eps=2^-6, rho=16
    std::mt19937_64 rng(11);
    SoundnessReport r = measure_soundness(p, c, 3000, rng);
    CHECK(r.trials == 3000);
    CHECK(r.pass);
    CHECK(r.measured == double(r.failures) / 3000);
    CHECK(r.measured < 0.05);
    CHECK(r.bound == soundness_bound(p));
}

TEST_CASE("monte carlo soundness: no retries means pure covertext") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(4, 1, 1.0, 1, std::nullopt, 0);
    std::mt19937_64 rng(13);
    SoundnessReport r = measure_soundness(p, c, 3000, rng);
    double expect = rho0_failure_exact(p); // 1 - 2^-4
    double sigma = std::sqrt(expect * (1 - expect) / 3000);
    CHECK(std::fabs(r.measured - expect) <= 4 * sigma);
}

TEST_CASE("warden game: the random adversary has no advantage") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8);
    auto adv = make_random_adversary();
    std::mt19937_64 rng(17);
    GameResult g = run_warden_game(p, c, *adv, 4000, rng);
    CHECK(g.trials == 4000);
    CHECK(g.successes <= g.trials);
    CHECK(g.advantage_estimate <= g.confidence_halfwidth);
}

TEST_CASE("warden game: likelihood ratio tracks half the exact distance") {
    ChannelModel c = ChannelModel::load(R"({
        "alphabet": ["a","b"], "kind": "memoryless", "min_entropy": "0.32",
        "rows": {"": ["0.8","0.2"]}
    })");
    ParamSet p = derive_params(2, 1, 0.32, 1, std::pow(2.0, -0.5), 2); // t=7, d=7
    REQUIRE(p.t == 7);
    std::mt19937_64 rng(19);
    DistanceEstimate est = seed_averaged_stego_distance(p, c, {}, rng);
    REQUIRE(est.exact);
    double target = 0.5 * rat_to_double(est.value);
    CHECK(target > 0.01); // the check below must be able to discriminate

    auto adv = make_likelihood_adversary();
    GameResult g = run_warden_game(p, c, *adv, 8000, rng);
    double sigma = g.confidence_halfwidth / 1.96;
    CHECK(std::fabs(g.advantage_estimate - target) <= 3 * sigma);
}

TEST_CASE("warden game: one adversary object survives an instance switch") {
    // the likelihood warden caches per-instance tables; moving it to a new
    // channel and parameter shape must rebuild them, not reuse stale ones
    ChannelModel u = ChannelModel::load_file("data/binary_uniform.json");
    ChannelModel m = ChannelModel::load_file("data/markov_ab.json");
    ParamSet p1 = derive_params(2, 1, 1.0, 1, 0.0625, 8);  // d=9
    ParamSet p2 = derive_params(2, 1, 0.7, 1, 0.0625, 4);  // d=13
    auto adv = make_likelihood_adversary();
    std::mt19937_64 rng(29);
    GameResult g1 = run_warden_game(p1, u, *adv, 300, rng);
    GameResult g2 = run_warden_game(p2, m, *adv, 300, rng);
    GameResult g3 = run_warden_game(p1, u, *adv, 300, rng);
    CHECK(g1.trials == 300);
    CHECK(g2.trials == 300);
    CHECK(g3.trials == 300);
}

TEST_CASE("warden game: the key-informed reference is sharply better") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8);
    auto adv = make_key_informed_adversary();
    std::mt19937_64 rng(23);
    GameResult g = run_warden_game(p, c, *adv, 2000, rng);
    CHECK(g.advantage_estimate > 0.2);
}

TEST_CASE("reports serialize with stable fields") {
    std::string text = render_report("distance", "demo", 0.25, 0.5, true, 128, 1.5,
                                     {{"note", "extra"}});
    nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j.at("kind") == "distance");
    CHECK(j.at("instance") == "demo");
    CHECK(j.at("measured") == 0.25);
    CHECK(j.at("bound") == 0.5);
    CHECK(j.at("pass") == true);
    CHECK(j.at("trials") == 128);
    CHECK(j.at("runtime_seconds") == 1.5);
    CHECK(j.at("note") == "extra");
}
