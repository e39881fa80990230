#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stegokit/probability.hpp"

namespace stegokit {

// Transmitted symbol indices, oldest first. Only the trailing `order`
// symbols ever influence a Markov row lookup, but the full sequence is kept:
// histories are protocol state and callers append to them between blocks.
using History = std::vector<int>;

struct BlockDistribution {
    int t = 0;
    DistQ dist; // over |alphabet|^t outcomes, index = base-|alphabet|, first symbol most significant
};

// History-dependent channel realized as memoryless or order-r Markov tables.
// Immutable after load; every operation takes the model by const reference.
class ChannelModel {
  public:
    // File format (JSON):
    //   alphabet:    list of symbol strings, size a power of two
    //   kind:        "memoryless" | "markov"
    //   order:       context length r (markov only)
    //   min_entropy: declared per-row floor delta, decimal string or number
    //   rows:        context string -> list of probabilities, one per symbol,
    //                each a decimal string parsed exactly into a rational.
    //                Context "" is the memoryless row / stream start; markov
    //                models must list every context of length 0..r.
    static ChannelModel load(const std::string& json_text);
    static ChannelModel load_file(const std::string& path);

    // Builds a model directly; validates like load.
    static ChannelModel make(std::vector<std::string> alphabet, int order, double delta,
                             std::map<std::vector<int>, DistQ> rows);

    int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
    int bits_per_symbol() const { return b_; }
    int order() const { return order_; }
    double declared_min_entropy() const { return delta_; }
    const std::vector<std::string>& alphabet() const { return alphabet_; }

    int symbol_index(const std::string& name) const;

    // Row addressed by the last min(order, |h|) symbols of h.
    const DistQ& row(const History& h) const;

    // One symbol from row(h); h is not mutated.
    int sample(const History& h, std::mt19937_64& rng) const;

    // Chained draw of t symbols starting from history h, appending each
    // symbol to a local copy of h between draws.
    std::vector<int> sample_block(const History& h, int t, std::mt19937_64& rng) const;

    // Exact marginal over t-symbol sequences by the product chain
    // Pr[c1..ct] = prod_i Pr[c_i | h . c1..c_{i-1}].
    BlockDistribution marginal_block(const History& h, int t,
                                     std::uint64_t outcome_cap = std::uint64_t(1) << 20) const;

    std::vector<int> context_of(const History& h) const;

  private:
    struct Row {
        DistQ exact;
        std::vector<double> cdf;
    };

    const Row& row_entry(const std::vector<int>& context) const;

    std::vector<std::string> alphabet_;
    int b_ = 0;
    int order_ = 0; // 0 = memoryless
    double delta_ = 0.0;
    std::map<std::vector<int>, Row> rows_;
};

} // namespace stegokit
