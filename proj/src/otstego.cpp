#include "stegokit/otstego.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stegokit/errors.hpp"

namespace stegokit {

namespace {

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void ParamSet::validate() const {
    if (nu < 2)
        throw input_error("message length must be >= 2");
    if (c < 1)
        throw input_error("block constant must be >= 1");
    if (b < 1)
        throw input_error("bits per symbol must be >= 1");
    if (!(delta > 0) || delta > static_cast<double>(b))
        throw input_error("min-entropy must lie in (0, b]");
    if (block_bits < 1 || block_bits > 56)
        throw input_error("block payload width out of range");
    if (ell < 1 || static_cast<long long>(ell) * block_bits < nu)
        throw input_error("blocks do not cover the message");
    if (!(eps_sec > 0.0) || eps_sec >= 1.0)
        throw input_error("embedding slack must lie in (0, 1)");
    if (rho < 0)
        throw input_error("retry bound must be >= 0");
    if (t < 1)
        throw input_error("symbols per block must be >= 1");
    extractor.validate();
    if (extractor.m != block_bits)
        throw input_error("extractor output width must equal block payload width");
    if (extractor.n != t * b)
        throw input_error("extractor input width must equal t*b");
    if (extractor.eps != eps_sec)
        throw input_error("extractor slack must equal eps_sec");
    if (t != static_cast<int>(std::ceil(static_cast<double>(extractor.k) / delta - 1e-9)))
        throw input_error("block symbol count must equal ceil(k/delta)");
}

ParamSet derive_params(int nu, int c, double delta, int b, std::optional<double> eps_sec,
                       std::optional<long long> rho) {
    if (nu < 2)
        throw input_error("message length must be >= 2");
    if (c < 1)
        throw input_error("block constant must be >= 1");
    if (b < 1)
        throw input_error("bits per symbol must be >= 1");
    if (!(delta > 0))
        throw input_error("min-entropy must be positive");
    if (delta > static_cast<double>(b))
        throw input_error("min-entropy cannot exceed bits per symbol");

    ParamSet p;
    p.nu = nu;
    p.c = c;
    p.delta = delta;
    p.b = b;

    int log_nu = std::bit_width(static_cast<unsigned>(nu - 1)); // ceil(log2 nu)
    long long eta = static_cast<long long>(c) * log_nu;
    if (eta >= nu) {
        // Single-block regime: one payload covering the whole message.
        p.block_bits = nu;
        p.ell = 1;
    } else {
        p.block_bits = static_cast<int>(eta);
        p.ell = (nu + p.block_bits - 1) / p.block_bits;
    }
    if (p.block_bits > 56)
        throw cap_error("block payload width exceeds the supported range");

    p.eps_sec = eps_sec ? *eps_sec
                        : 1.0 / (4.0 * std::pow(2.0, 2.0 * p.block_bits));
    if (!(p.eps_sec > 0.0) || p.eps_sec >= 1.0)
        throw input_error("embedding slack must lie in (0, 1)");

    p.rho = rho ? *rho
                : 2LL * p.block_bits * (1LL << p.block_bits);
    if (p.rho < 0)
        throw input_error("retry bound must be >= 0");

    double k_real = p.block_bits + 2.0 * std::log2(1.0 / p.eps_sec);
    int k = static_cast<int>(std::ceil(k_real - 1e-9));
    p.t = static_cast<int>(std::ceil(static_cast<double>(k) / delta - 1e-9));
    p.extractor = make_extractor_params(p.t * b, k, p.block_bits, p.eps_sec);
    p.validate();
    return p;
}

StegoKey keygen(const ParamSet& params, std::mt19937_64& rng) {
    params.validate();
    StegoKey key;
    key.params = params;
    key.otp = BitVec::random(params.nu, rng);
    key.seed = BitVec::random(params.extractor.d, rng);
    return key;
}

BitVec block_input_bits(const std::vector<int>& symbols, int b) {
    BitVec x(symbols.size() * b);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        int s = symbols[i];
        if (s < 0 || (b < 31 && s >= (1 << b)))
            throw input_error("symbol index out of range for symbol width");
        for (int u = 0; u < b; ++u)
            x.set(i * b + u, (s >> u) & 1);
    }
    return x;
}

BlockMap extractor_block_map(const ParamSet& params, const BitVec& seed) {
    ExtractorParams ep = params.extractor;
    int b = params.b;
    return [ep, seed, b](const std::vector<int>& symbols) {
        return extract(ep, seed, block_input_bits(symbols, b)).to_u64();
    };
}

namespace {

void check_channel_fits(const ParamSet& params, const ChannelModel& c) {
    if (c.bits_per_symbol() != params.b)
        throw mismatch_error("channel symbol width does not match the key");
    if (c.declared_min_entropy() + 1e-9 < params.delta)
        throw mismatch_error("channel min-entropy is below the key requirement");
}

std::uint64_t message_block_target(const BitVec& m, int block, int block_bits) {
    std::uint64_t target = 0;
    for (int u = 0; u < block_bits; ++u) {
        std::size_t idx = static_cast<std::size_t>(block) * block_bits + u;
        if (idx < m.size() && m.get(idx))
            target |= std::uint64_t(1) << u;
    }
    return target;
}

} // namespace

Stegotext se_encode(const StegoKey& key, const BitVec& message, const ChannelModel& c,
                    History& h, std::mt19937_64& rng, std::vector<long long>* rounds) {
    const ParamSet& p = key.params;
    p.validate();
    check_channel_fits(p, c);
    if (static_cast<int>(message.size()) != p.nu)
        throw input_error("message length does not match parameters");
    if (static_cast<int>(key.otp.size()) != p.nu ||
        static_cast<int>(key.seed.size()) != p.extractor.d)
        throw input_error("key material length mismatch");

    BitVec m = message.xor_with(key.otp);
    RejSamConfig cfg{p.rho, p.t, p.block_bits};
    BlockMap f = extractor_block_map(p, key.seed);

    Stegotext st;
    st.ell = p.ell;
    st.t = p.t;
    st.symbols.reserve(static_cast<std::size_t>(p.ell) * p.t);
    if (rounds)
        rounds->clear();
    for (int i = 0; i < p.ell; ++i) {
        RejSamDraw draw = rejsam(cfg, message_block_target(m, i, p.block_bits), c, h, f, rng);
        st.symbols.insert(st.symbols.end(), draw.symbols.begin(), draw.symbols.end());
        h.insert(h.end(), draw.symbols.begin(), draw.symbols.end());
        if (rounds)
            rounds->push_back(draw.rounds);
    }
    return st;
}

BitVec sd_decode(const StegoKey& key, const Stegotext& st) {
    const ParamSet& p = key.params;
    p.validate();
    if (st.symbols.size() != static_cast<std::size_t>(p.ell) * p.t)
        throw mismatch_error("stegotext length does not match parameters");

    BitVec out(p.nu);
    for (int i = 0; i < p.ell; ++i) {
        std::vector<int> block(st.symbols.begin() + static_cast<std::size_t>(i) * p.t,
                               st.symbols.begin() + static_cast<std::size_t>(i + 1) * p.t);
        BitVec y = extract(p.extractor, key.seed, block_input_bits(block, p.b));
        for (int u = 0; u < p.block_bits; ++u) {
            std::size_t idx = static_cast<std::size_t>(i) * p.block_bits + u;
            if (idx < out.size())
                out.set(idx, y.get(u));
        }
    }
    return out.xor_with(key.otp);
}

std::string key_to_text(const StegoKey& key) {
    key.params.validate();
    std::ostringstream os;
    os << "stegokit-key v1\n";
    os << "nu=" << key.params.nu << " c=" << key.params.c << " delta="
       << fmt_real(key.params.delta) << " b=" << key.params.b << " eps="
       << fmt_real(key.params.eps_sec) << " rho=" << key.params.rho << "\n";
    os << "otp=" << key.otp.to_hex() << "\n";
    os << "seed=" << key.seed.to_hex() << "\n";
    return os.str();
}

namespace {

std::string expect_prefix(const std::string& line, const std::string& prefix) {
    if (line.rfind(prefix, 0) != 0)
        throw input_error("malformed key file: expected '" + prefix + "'");
    return line.substr(prefix.size());
}

} // namespace

StegoKey key_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "stegokit-key v1")
        throw input_error("unsupported key file header");
    if (!std::getline(is, line))
        throw input_error("truncated key file");

    int nu = 0, c = 0, b = 0;
    double delta = 0, eps = 0;
    long long rho = 0;
    bool have[6] = {};
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
        auto pos = field.find('=');
        if (pos == std::string::npos)
            throw input_error("malformed key parameter: " + field);
        std::string name = field.substr(0, pos);
        std::string value = field.substr(pos + 1);
        try {
            if (name == "nu") {
                nu = std::stoi(value);
                have[0] = true;
            } else if (name == "c") {
                c = std::stoi(value);
                have[1] = true;
            } else if (name == "delta") {
                delta = std::stod(value);
                have[2] = true;
            } else if (name == "b") {
                b = std::stoi(value);
                have[3] = true;
            } else if (name == "eps") {
                eps = std::stod(value);
                have[4] = true;
            } else if (name == "rho") {
                rho = std::stoll(value);
                have[5] = true;
            } else {
                throw input_error("unknown key parameter: " + name);
            }
        } catch (const std::invalid_argument&) {
            throw input_error("unparsable key parameter: " + field);
        } catch (const std::out_of_range&) {
            throw input_error("key parameter out of range: " + field);
        }
    }
    for (bool h : have)
        if (!h)
            throw input_error("key file missing a required parameter");

    StegoKey key;
    key.params = derive_params(nu, c, delta, b, eps, rho);
    if (!std::getline(is, line))
        throw input_error("truncated key file");
    key.otp = BitVec::from_hex(expect_prefix(line, "otp="), nu);
    if (!std::getline(is, line))
        throw input_error("truncated key file");
    key.seed = BitVec::from_hex(expect_prefix(line, "seed="), key.params.extractor.d);
    return key;
}

void save_key(const StegoKey& key, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw input_error("cannot write key file: " + path);
    out << key_to_text(key);
    if (!out.flush())
        throw input_error("cannot write key file: " + path);
}

StegoKey load_key(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot read key file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return key_from_text(buf.str());
}

std::string stegotext_to_text(const Stegotext& st, const ChannelModel& c) {
    std::ostringstream os;
    for (std::size_t i = 0; i < st.symbols.size(); ++i) {
        int s = st.symbols[i];
        if (s < 0 || s >= c.alphabet_size())
            throw input_error("stegotext symbol out of range");
        if (i)
            os << ' ';
        os << c.alphabet()[s];
    }
    os << '\n';
    return os.str();
}

Stegotext stegotext_from_text(const std::string& text, const ChannelModel& c,
                              const ParamSet& params) {
    Stegotext st;
    st.ell = params.ell;
    st.t = params.t;
    std::istringstream is(text);
    std::string token;
    while (is >> token)
        st.symbols.push_back(c.symbol_index(token));
    if (st.symbols.size() != static_cast<std::size_t>(params.ell) * params.t)
        throw mismatch_error("stegotext length does not match parameters");
    return st;
}

void save_stegotext(const Stegotext& st, const ChannelModel& c, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw input_error("cannot write stegotext file: " + path);
    out << stegotext_to_text(st, c);
    if (!out.flush())
        throw input_error("cannot write stegotext file: " + path);
}

Stegotext load_stegotext(const std::string& path, const ChannelModel& c,
                         const ParamSet& params) {
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot read stegotext file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return stegotext_from_text(buf.str(), c, params);
}

} // namespace stegokit
