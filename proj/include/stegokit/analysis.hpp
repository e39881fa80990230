#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "stegokit/bits.hpp"
#include "stegokit/channel.hpp"
#include "stegokit/otstego.hpp"
#include "stegokit/rational.hpp"

namespace stegokit {

// ell * (sqrt(eps) + 2 * eps^(1/4)); values above 1 say nothing about a
// distance and are flagged vacuous.
struct SecurityBound {
    double value = 0;
    bool vacuous = false;
};
SecurityBound security_bound(const ParamSet& params);

// Decode-failure probability bound
//   ell * ((1 - eps^(1/4)) * (1 - (2^-eta - sqrt(eps)))^rho + eps^(1/4)
//          + ell * eps^(1/4)),
// evaluated with the instance's own (eps, rho, eta, ell).
double soundness_bound(const ParamSet& params);

// Closed form of the same bound at c = 4 with the default eps and rho:
// 1/(4 nu^3 log2 nu) + 1/(4 sqrt2 nu log2 nu) + 1/(16 sqrt2 log2^2 nu).
double soundness_bound_c4(int nu);

// With rho = 0 the embedder emits pure covertext, so decode succeeds only by
// luck: failure probability is exactly 1 - 2^-nu for any channel and seed.
double rho0_failure_exact(const ParamSet& params);

// Exact total-variation distance between the embedder's output transcript
// (lambda symbols, messages marginalized through the uniform pad) and the
// covertext distribution, for one fixed extractor seed. Rational arithmetic
// throughout; throws cap_error when the instance is too large.
Rat exact_stego_distance(const ParamSet& params, const BitVec& seed, const ChannelModel& c,
                         const History& h);

// Distance averaged over the seed: exact enumeration of all 2^d seeds when
// d <= max_enum_log2_seeds, otherwise a sampled estimate with a flagged
// confidence half-width.
struct DistanceEstimate {
    Rat value = 0;
    bool exact = false;
    std::uint64_t seeds_used = 0;
    double ci_halfwidth = 0;
};
DistanceEstimate seed_averaged_stego_distance(const ParamSet& params, const ChannelModel& c,
                                              const History& h, std::mt19937_64& rng,
                                              int max_enum_log2_seeds = 16,
                                              std::uint64_t sample_seeds = 256);

struct SoundnessReport {
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double measured = 0;
    double bound = 0;
    double sigma = 0; // binomial std dev of the measured rate
    bool pass = false;
};
SoundnessReport measure_soundness(const ParamSet& params, const ChannelModel& c,
                                  std::uint64_t trials, std::mt19937_64& rng);

struct GameResult {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double advantage_estimate = 0;
    double confidence_halfwidth = 0; // 95% normal approximation
};

struct WardenChoice {
    BitVec message;
    History history;
};

// Distinguisher strategy for the hidden-coin game. guess_stego sees the key
// because strategies differ in what they are allowed to read: the
// likelihood-ratio strategy uses only the seed (treated as public), the
// random strategy nothing, and the key-informed reference everything.
class WardenAdversary {
  public:
    virtual ~WardenAdversary() = default;
    virtual WardenChoice choose(const ParamSet& params, const ChannelModel& c,
                                std::mt19937_64& rng) = 0;
    virtual bool guess_stego(const StegoKey& key, const ChannelModel& c, const History& h,
                             const std::vector<int>& transcript, std::mt19937_64& rng) = 0;
};

std::unique_ptr<WardenAdversary> make_random_adversary();
// Exact per-seed likelihood-ratio test; expected advantage is half the
// seed-averaged transcript distance.
std::unique_ptr<WardenAdversary> make_likelihood_adversary();
// Out-of-model reference: decodes with the full key and bets on a match.
std::unique_ptr<WardenAdversary> make_key_informed_adversary();

// Per trial: fresh key, adversary picks (message, history), a fair coin
// selects embedder output or lambda chained covertext draws, the adversary
// guesses which.
GameResult run_warden_game(const ParamSet& params, const ChannelModel& c,
                           WardenAdversary& adversary, std::uint64_t trials,
                           std::mt19937_64& rng);

// Stable-field JSON report for scripted consumers.
std::string render_report(const std::string& kind, const std::string& instance,
                          double measured, double bound, bool pass, std::uint64_t trials,
                          double runtime_seconds,
                          const std::map<std::string, std::string>& extra = {});

} // namespace stegokit
