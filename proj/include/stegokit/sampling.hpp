#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "stegokit/channel.hpp"
#include "stegokit/probability.hpp"
#include "stegokit/rational.hpp"

namespace stegokit {

// Rejection-sampling configuration: up to rho full rounds over t-symbol
// blocks, steering toward an eta-bit target.
struct RejSamConfig {
    long long rho = 0;
    int t = 1;
    int eta = 1;
    void validate() const;
};

// Total map from a t-symbol block to an eta-bit value.
using BlockMap = std::function<std::uint64_t(const std::vector<int>&)>;

struct RejSamDraw {
    std::vector<int> symbols;
    long long rounds = 0; // channel draws consumed, <= rho + 1
};

// Big-endian base-|alphabet| packing shared with BlockDistribution.
std::vector<int> block_symbols(std::uint64_t index, int t, int alphabet_size);
std::uint64_t block_index(const std::vector<int>& symbols, int alphabet_size);

// Draw i.i.d. blocks with a fixed history until f(block) == target, at most
// rho tries; the (rho+1)-th draw is returned unconditionally.
RejSamDraw rejsam(const RejSamConfig& cfg, std::uint64_t target, const ChannelModel& c,
                  const History& h, const BlockMap& f, std::mt19937_64& rng);

// Per-target weights for the closed-form output distribution: a block with
// f(block) == target carries mass p * (accept + final), any other block
// p * final, where accept = sum_{j=1..rho} (1-P)^{j-1} and final = (1-P)^rho
// for P = Pr[f(draw) == target]. Computed by the round-by-round recurrence.
struct RejSamWeights {
    Rat accept = 0;
    Rat final_weight = 1;
};
RejSamWeights rejsam_weights(const Rat& target_mass, long long rho);

// Distribution of f(C_h^t) over eta-bit outputs.
DistQ block_pushforward(const RejSamConfig& cfg, const ChannelModel& c, const History& h,
                        const BlockMap& f, std::uint64_t outcome_cap = std::uint64_t(1) << 20);

// Exact output distribution of rejsam for one fixed target.
BlockDistribution rejsam_exact_distribution(const RejSamConfig& cfg, std::uint64_t target,
                                            const ChannelModel& c, const History& h,
                                            const BlockMap& f,
                                            std::uint64_t outcome_cap = std::uint64_t(1) << 20);

// Mixture over targets drawn from target_dist of the per-target exact output
// distributions; target_dist must cover all 2^eta targets.
BlockDistribution rejsam_mixture_distribution(const RejSamConfig& cfg, const ChannelModel& c,
                                              const History& h, const BlockMap& f,
                                              const DistQ& target_dist,
                                              std::uint64_t outcome_cap = std::uint64_t(1) << 20);

} // namespace stegokit
