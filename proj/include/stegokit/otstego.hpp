#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stegokit/bits.hpp"
#include "stegokit/channel.hpp"
#include "stegokit/extractor.hpp"
#include "stegokit/sampling.hpp"

namespace stegokit {

// Derived parameter bundle for one message of nu bits over a channel with
// min-entropy delta and b bits per symbol.
struct ParamSet {
    int nu = 0;         // message length in bits
    int c = 4;          // block-size constant
    int block_bits = 0; // eta, payload bits per block
    int ell = 0;        // number of blocks
    double eps_sec = 0; // per-block embedding slack
    long long rho = 0;  // rejection retry bound
    int t = 0;          // symbols per block
    double delta = 0;   // required channel min-entropy per symbol
    int b = 0;          // bits per symbol
    ExtractorParams extractor;

    int total_symbols() const { return ell * t; }
    void validate() const;
};

ParamSet derive_params(int nu, int c, double delta, int b,
                       std::optional<double> eps_sec = std::nullopt,
                       std::optional<long long> rho = std::nullopt);

struct StegoKey {
    BitVec otp;
    BitVec seed;
    ParamSet params;
};

StegoKey keygen(const ParamSet& params, std::mt19937_64& rng);

struct Stegotext {
    std::vector<int> symbols;
    int ell = 0;
    int t = 0;
};

// Bits of a t-symbol block as extractor input: bit i*b+u is bit u of symbol i.
BitVec block_input_bits(const std::vector<int>& symbols, int b);

// Block map used by the embedder: extract under a fixed seed.
BlockMap extractor_block_map(const ParamSet& params, const BitVec& seed);

// Embed message (nu bits) into ell blocks of t symbols; each block is chosen
// by rejection sampling toward its payload and appended to h before the next.
// rounds, when given, receives the per-block channel-draw counts.
Stegotext se_encode(const StegoKey& key, const BitVec& message, const ChannelModel& c,
                    History& h, std::mt19937_64& rng,
                    std::vector<long long>* rounds = nullptr);

// Extract each block's payload with the shared seed, reassemble, unmask.
// Never fails on well-formed input; embedding misses surface as wrong bits.
BitVec sd_decode(const StegoKey& key, const Stegotext& st);

std::string key_to_text(const StegoKey& key);
StegoKey key_from_text(const std::string& text);
void save_key(const StegoKey& key, const std::string& path);
StegoKey load_key(const std::string& path);

std::string stegotext_to_text(const Stegotext& st, const ChannelModel& c);
Stegotext stegotext_from_text(const std::string& text, const ChannelModel& c,
                              const ParamSet& params);
void save_stegotext(const Stegotext& st, const ChannelModel& c, const std::string& path);
Stegotext load_stegotext(const std::string& path, const ChannelModel& c,
                         const ParamSet& params);

} // namespace stegokit
