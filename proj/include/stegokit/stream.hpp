#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "stegokit/bits.hpp"
#include "stegokit/channel.hpp"
#include "stegokit/otstego.hpp"

namespace stegokit {

inline constexpr std::size_t kMasterBits = 256;
inline constexpr std::uint64_t kPrgBlockBits = 512;

// Position inside the keystream: block counter plus intra-block bit offset.
// Fully determined by the consumed-bit count; stored so resumption is O(1)
// and survives restarts.
struct PrgAux {
    std::uint64_t block = 0;
    std::uint32_t offset = 0;
};

PrgAux aux_of(std::uint64_t n_consumed);

struct PrgState {
    BitVec master; // 256 bits
    std::uint64_t n_consumed = 0;
    PrgAux aux;
};

PrgState make_prg_state(const BitVec& master);

// Deterministic variable-output expansion: prg_expand(x, y) is a prefix of
// prg_expand(x, y + y') for every y'.
BitVec prg_expand(const BitVec& master, std::uint64_t y);

// Emit the next y' bits — positions [N, N+y') of the full expansion — and
// advance the state. Cost is independent of N.
BitVec prg_resume(PrgState& state, std::uint64_t y_prime);

// Per-message parameter derivation knobs shared by both endpoints.
struct StreamConfig {
    int c = 1;
    std::optional<double> eps_sec;
    std::optional<long long> rho;
};

struct StreamSession {
    PrgState prg;
    History history;
    StreamConfig config;
};

StreamSession make_session(const BitVec& master, const StreamConfig& config);

// Parameters a session derives for one message of the given length over the
// given channel (both endpoints must agree on the channel description).
ParamSet stream_params(const StreamSession& sess, int message_bits, const ChannelModel& c);

// Derive a fresh one-time key from the PRG (otp first, then seed), embed,
// and advance PRG position and history.
Stegotext stream_encode(StreamSession& sess, const BitVec& message, const ChannelModel& c,
                        std::mt19937_64& rng);

// Derive the same key material, decode, and advance state; the received
// symbols extend the history. Desynchronized endpoints produce garbage, not
// errors.
BitVec stream_decode(StreamSession& sess, const Stegotext& st, int message_bits,
                     const ChannelModel& c);

std::string session_to_text(const StreamSession& sess, const ChannelModel& c);
StreamSession session_from_text(const std::string& text, const ChannelModel& c);
void save_session(const StreamSession& sess, const ChannelModel& c, const std::string& path);
StreamSession load_session(const std::string& path, const ChannelModel& c);

} // namespace stegokit
