#include "stegokit/stream.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stegokit/errors.hpp"

namespace stegokit {

namespace {

inline std::uint32_t rotl32(std::uint32_t x, int r) {
    return (x << r) | (x >> (32 - r));
}

inline void quarter(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    a += b; d ^= a; d = rotl32(d, 16);
    c += d; b ^= c; b = rotl32(b, 12);
    a += b; d ^= a; d = rotl32(d, 8);
    c += d; b ^= c; b = rotl32(b, 7);
}

// One 64-byte keystream block: standard 20-round ChaCha core keyed with the
// master, a 64-bit block counter in words 12-13, and a zero nonce.
std::array<std::uint8_t, 64> keystream_block(const std::array<std::uint32_t, 8>& key,
                                             std::uint64_t counter) {
    std::uint32_t init[16] = {
        0x61707865u, 0x3320646eu, 0x79622d32u, 0x6b206574u,
        key[0], key[1], key[2], key[3], key[4], key[5], key[6], key[7],
        static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
        0u, 0u};
    std::uint32_t w[16];
    for (int i = 0; i < 16; ++i)
        w[i] = init[i];
    for (int round = 0; round < 10; ++round) {
        quarter(w[0], w[4], w[8], w[12]);
        quarter(w[1], w[5], w[9], w[13]);
        quarter(w[2], w[6], w[10], w[14]);
        quarter(w[3], w[7], w[11], w[15]);
        quarter(w[0], w[5], w[10], w[15]);
        quarter(w[1], w[6], w[11], w[12]);
        quarter(w[2], w[7], w[8], w[13]);
        quarter(w[3], w[4], w[9], w[14]);
    }
    std::array<std::uint8_t, 64> out;
    for (int i = 0; i < 16; ++i) {
        std::uint32_t v = w[i] + init[i];
        out[4 * i + 0] = static_cast<std::uint8_t>(v);
        out[4 * i + 1] = static_cast<std::uint8_t>(v >> 8);
        out[4 * i + 2] = static_cast<std::uint8_t>(v >> 16);
        out[4 * i + 3] = static_cast<std::uint8_t>(v >> 24);
    }
    return out;
}

std::array<std::uint32_t, 8> key_words(const BitVec& master) {
    if (master.size() != kMasterBits)
        throw input_error("master key must be 256 bits");
    std::array<std::uint8_t, 32> bytes{};
    for (std::size_t i = 0; i < kMasterBits; ++i)
        if (master.get(i))
            bytes[i / 8] |= std::uint8_t(1) << (i % 8);
    std::array<std::uint32_t, 8> words;
    for (int i = 0; i < 8; ++i)
        words[i] = std::uint32_t(bytes[4 * i]) | (std::uint32_t(bytes[4 * i + 1]) << 8) |
                   (std::uint32_t(bytes[4 * i + 2]) << 16) |
                   (std::uint32_t(bytes[4 * i + 3]) << 24);
    return words;
}

// Bits [start, start+count) of the keystream; bit j of a block is bit j%8
// of byte j/8.
BitVec keystream_bits(const BitVec& master, std::uint64_t start, std::uint64_t count) {
    std::array<std::uint32_t, 8> key = key_words(master);
    BitVec out(count);
    std::uint64_t filled = 0;
    std::uint64_t block = start / kPrgBlockBits;
    std::uint64_t offset = start % kPrgBlockBits;
    while (filled < count) {
        std::array<std::uint8_t, 64> bytes = keystream_block(key, block);
        for (std::uint64_t j = offset; j < kPrgBlockBits && filled < count; ++j, ++filled)
            out.set(filled, (bytes[j / 8] >> (j % 8)) & 1);
        offset = 0;
        ++block;
    }
    return out;
}

} // namespace

PrgAux aux_of(std::uint64_t n_consumed) {
    return PrgAux{n_consumed / kPrgBlockBits,
                  static_cast<std::uint32_t>(n_consumed % kPrgBlockBits)};
}

PrgState make_prg_state(const BitVec& master) {
    if (master.size() != kMasterBits)
        throw input_error("master key must be 256 bits");
    PrgState s;
    s.master = master;
    s.n_consumed = 0;
    s.aux = aux_of(0);
    return s;
}

BitVec prg_expand(const BitVec& master, std::uint64_t y) {
    return keystream_bits(master, 0, y);
}

BitVec prg_resume(PrgState& state, std::uint64_t y_prime) {
    if (state.aux.block != state.n_consumed / kPrgBlockBits ||
        state.aux.offset != state.n_consumed % kPrgBlockBits)
        throw input_error("inconsistent keystream position");
    BitVec out = keystream_bits(state.master,
                                state.aux.block * kPrgBlockBits + state.aux.offset, y_prime);
    state.n_consumed += y_prime;
    state.aux = aux_of(state.n_consumed);
    return out;
}

StreamSession make_session(const BitVec& master, const StreamConfig& config) {
    StreamSession sess;
    sess.prg = make_prg_state(master);
    sess.config = config;
    return sess;
}

ParamSet stream_params(const StreamSession& sess, int message_bits, const ChannelModel& c) {
    return derive_params(message_bits, sess.config.c, c.declared_min_entropy(),
                         c.bits_per_symbol(), sess.config.eps_sec, sess.config.rho);
}

Stegotext stream_encode(StreamSession& sess, const BitVec& message, const ChannelModel& c,
                        std::mt19937_64& rng) {
    if (message.size() < 2)
        throw input_error("message must be at least 2 bits");
    ParamSet params = stream_params(sess, static_cast<int>(message.size()), c);
    BitVec material = prg_resume(sess.prg,
                                 static_cast<std::uint64_t>(params.nu) + params.extractor.d);
    StegoKey key;
    key.params = params;
    key.otp = BitVec(params.nu);
    key.seed = BitVec(params.extractor.d);
    for (int i = 0; i < params.nu; ++i)
        key.otp.set(i, material.get(i));
    for (int i = 0; i < params.extractor.d; ++i)
        key.seed.set(i, material.get(params.nu + i));
    return se_encode(key, message, c, sess.history, rng);
}

BitVec stream_decode(StreamSession& sess, const Stegotext& st, int message_bits,
                     const ChannelModel& c) {
    if (message_bits < 2)
        throw input_error("message must be at least 2 bits");
    ParamSet params = stream_params(sess, message_bits, c);
    // Shape check before any key material is consumed: a malformed
    // transcript must not advance the keystream position.
    if (st.symbols.size() != static_cast<std::size_t>(params.total_symbols()))
        throw mismatch_error("stegotext length does not match parameters");
    BitVec material = prg_resume(sess.prg,
                                 static_cast<std::uint64_t>(params.nu) + params.extractor.d);
    StegoKey key;
    key.params = params;
    key.otp = BitVec(params.nu);
    key.seed = BitVec(params.extractor.d);
    for (int i = 0; i < params.nu; ++i)
        key.otp.set(i, material.get(i));
    for (int i = 0; i < params.extractor.d; ++i)
        key.seed.set(i, material.get(params.nu + i));
    BitVec message = sd_decode(key, st);
    sess.history.insert(sess.history.end(), st.symbols.begin(), st.symbols.end());
    return message;
}

std::string session_to_text(const StreamSession& sess, const ChannelModel& c) {
    std::ostringstream os;
    os << "stegokit-session v1\n";
    os << "master=" << sess.prg.master.to_hex() << "\n";
    os << "n=" << sess.prg.n_consumed << "\n";
    char aux[32];
    std::snprintf(aux, sizeof aux, "%016llx%04x",
                  static_cast<unsigned long long>(sess.prg.aux.block), sess.prg.aux.offset);
    os << "aux=" << aux << "\n";
    os << "config=c=" << sess.config.c << " eps=";
    if (sess.config.eps_sec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", *sess.config.eps_sec);
        os << buf;
    } else {
        os << "default";
    }
    os << " rho=";
    if (sess.config.rho)
        os << *sess.config.rho;
    else
        os << "default";
    os << "\n";
    os << "history=";
    for (std::size_t i = 0; i < sess.history.size(); ++i) {
        int s = sess.history[i];
        if (s < 0 || s >= c.alphabet_size())
            throw input_error("history symbol out of range");
        if (i)
            os << ' ';
        os << c.alphabet()[s];
    }
    os << "\n";
    return os.str();
}

namespace {

std::string line_value(const std::string& line, const std::string& prefix) {
    if (line.rfind(prefix, 0) != 0)
        throw input_error("malformed session file: expected '" + prefix + "'");
    return line.substr(prefix.size());
}

} // namespace

StreamSession session_from_text(const std::string& text, const ChannelModel& c) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "stegokit-session v1")
        throw input_error("unsupported session file header");

    StreamSession sess;
    if (!std::getline(is, line))
        throw input_error("truncated session file");
    sess.prg.master = BitVec::from_hex(line_value(line, "master="), kMasterBits);

    if (!std::getline(is, line))
        throw input_error("truncated session file");
    try {
        sess.prg.n_consumed = std::stoull(line_value(line, "n="));
    } catch (const std::exception&) {
        throw input_error("unparsable consumed-bit count");
    }

    if (!std::getline(is, line))
        throw input_error("truncated session file");
    std::string aux = line_value(line, "aux=");
    if (aux.size() != 20)
        throw input_error("resumption token must be 20 hex digits");
    try {
        sess.prg.aux.block = std::stoull(aux.substr(0, 16), nullptr, 16);
        sess.prg.aux.offset = static_cast<std::uint32_t>(std::stoul(aux.substr(16), nullptr, 16));
    } catch (const std::exception&) {
        throw input_error("unparsable resumption token");
    }
    PrgAux expect = aux_of(sess.prg.n_consumed);
    if (sess.prg.aux.block != expect.block || sess.prg.aux.offset != expect.offset)
        throw input_error("resumption token inconsistent with consumed-bit count");

    if (!std::getline(is, line))
        throw input_error("truncated session file");
    std::istringstream cfg(line_value(line, "config="));
    std::string field;
    bool have_c = false, have_eps = false, have_rho = false;
    while (cfg >> field) {
        auto pos = field.find('=');
        if (pos == std::string::npos)
            throw input_error("malformed session config: " + field);
        std::string name = field.substr(0, pos);
        std::string value = field.substr(pos + 1);
        try {
            if (name == "c") {
                sess.config.c = std::stoi(value);
                have_c = true;
            } else if (name == "eps") {
                if (value != "default")
                    sess.config.eps_sec = std::stod(value);
                have_eps = true;
            } else if (name == "rho") {
                if (value != "default")
                    sess.config.rho = std::stoll(value);
                have_rho = true;
            } else {
                throw input_error("unknown session config field: " + name);
            }
        } catch (const std::invalid_argument&) {
            throw input_error("unparsable session config field: " + field);
        } catch (const std::out_of_range&) {
            throw input_error("session config field out of range: " + field);
        }
    }
    if (!have_c || !have_eps || !have_rho)
        throw input_error("session config missing a required field");

    if (!std::getline(is, line))
        throw input_error("truncated session file");
    std::istringstream hist(line_value(line, "history="));
    std::string token;
    while (hist >> token)
        sess.history.push_back(c.symbol_index(token));
    return sess;
}

void save_session(const StreamSession& sess, const ChannelModel& c, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw input_error("cannot write session file: " + path);
    out << session_to_text(sess, c);
    if (!out.flush())
        throw input_error("cannot write session file: " + path);
}

StreamSession load_session(const std::string& path, const ChannelModel& c) {
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot read session file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return session_from_text(buf.str(), c);
}

} // namespace stegokit
