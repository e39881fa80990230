#include "stegokit/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stegokit/errors.hpp"

namespace stegokit {

namespace {

constexpr double kDeltaSlack = 1e-9;

bool is_power_of_two(std::size_t n) {
    return n > 0 && (n & (n - 1)) == 0;
}

int log2_exact(std::size_t n) {
    int b = 0;
    while ((std::size_t(1) << b) < n)
        ++b;
    return b;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Context strings concatenate symbol names; tokenize greedily by longest
// symbol match so multi-character names work as long as no name is a prefix
// ambiguity trap. Fixtures use single-character names.
std::vector<int> parse_context(const std::string& text, const std::vector<std::string>& alphabet) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        int best = -1;
        std::size_t best_len = 0;
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            const std::string& sym = alphabet[i];
            if (sym.size() > best_len && text.compare(pos, sym.size(), sym) == 0) {
                best = static_cast<int>(i);
                best_len = sym.size();
            }
        }
        if (best < 0)
            throw input_error("context string '" + text + "' does not tokenize over the alphabet");
        out.push_back(best);
        pos += best_len;
    }
    return out;
}

} // namespace

ChannelModel ChannelModel::make(std::vector<std::string> alphabet, int order, double delta,
                                std::map<std::vector<int>, DistQ> rows) {
    if (!is_power_of_two(alphabet.size()))
        throw input_error("alphabet size must be a power of two");
    if (order < 0)
        throw input_error("negative markov order");
    if (delta <= 0)
        throw input_error("declared min-entropy must be positive");

    ChannelModel m;
    m.alphabet_ = std::move(alphabet);
    m.b_ = log2_exact(m.alphabet_.size());
    m.order_ = order;
    m.delta_ = delta;

    for (std::size_t i = 0; i < m.alphabet_.size(); ++i) {
        for (std::size_t j = i + 1; j < m.alphabet_.size(); ++j)
            if (m.alphabet_[i] == m.alphabet_[j])
                throw input_error("duplicate alphabet symbol '" + m.alphabet_[i] + "'");
        if (m.alphabet_[i].empty())
            throw input_error("empty alphabet symbol");
    }

    // Every context of length 0..order must be present: lookups are total
    // and each row is checked against delta once, at load.
    std::uint64_t expected = 0, power = 1;
    for (int len = 0; len <= order; ++len) {
        expected += power;
        power *= m.alphabet_.size();
        if (expected > (std::uint64_t(1) << 16))
            throw cap_error("markov context table too large");
    }
    if (rows.size() != expected)
        throw input_error("rows must cover every context of length 0.." + std::to_string(order) +
                          " (expected " + std::to_string(expected) + ", got " +
                          std::to_string(rows.size()) + ")");

    for (auto& [ctx, dist] : rows) {
        if (static_cast<int>(ctx.size()) > order)
            throw input_error("context longer than the declared order");
        for (int s : ctx)
            if (s < 0 || s >= m.alphabet_size())
                throw input_error("context symbol out of range");
        if (dist.size() != m.alphabet_.size())
            throw input_error("row width does not match the alphabet");
        dist.validate();
        double h = min_entropy(dist);
        if (h + kDeltaSlack < delta) {
            throw input_error("row min-entropy " + std::to_string(h) +
                              " below declared delta " + std::to_string(delta));
        }
        Row row;
        row.exact = dist;
        double acc = 0.0;
        for (const auto& mass : dist.mass) {
            acc += rat_to_double(mass);
            row.cdf.push_back(acc);
        }
        row.cdf.back() = 1.0;
        m.rows_.emplace(ctx, std::move(row));
    }
    return m;
}

ChannelModel ChannelModel::load(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("channel file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw input_error("channel file must be a JSON object");

    try {
        std::vector<std::string> alphabet;
        for (const auto& sym : doc.at("alphabet"))
            alphabet.push_back(sym.get<std::string>());

        std::string kind = doc.at("kind").get<std::string>();
        int order = 0;
        if (kind == "markov") {
            order = doc.at("order").get<int>();
            if (order < 1)
                throw input_error("markov order must be >= 1");
        } else if (kind != "memoryless") {
            throw input_error("kind must be 'memoryless' or 'markov'");
        }

        double delta = 0.0;
        const auto& de = doc.at("min_entropy");
        if (de.is_string())
            delta = std::stod(de.get<std::string>());
        else
            delta = de.get<double>();

        if (!doc.contains("rows") || !doc["rows"].is_object())
            throw input_error("channel file needs a rows object");
        std::map<std::vector<int>, DistQ> rows;
        for (const auto& [ctx_text, probs] : doc["rows"].items()) {
            std::vector<int> ctx = parse_context(ctx_text, alphabet);
            DistQ dist;
            if (!probs.is_array())
                throw input_error("row for context '" + ctx_text + "' must be a list");
            for (const auto& p : probs) {
                if (!p.is_string())
                    throw input_error(
                        "probabilities must be decimal strings, got a non-string in row '" +
                        ctx_text + "'");
                dist.mass.push_back(rat_from_decimal(p.get<std::string>()));
            }
            if (!rows.emplace(std::move(ctx), std::move(dist)).second)
                throw input_error("duplicate context row '" + ctx_text + "'");
        }

        return make(std::move(alphabet), order, delta, std::move(rows));
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed channel file: ") + e.what());
    }
}

ChannelModel ChannelModel::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot open channel file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str());
}

int ChannelModel::symbol_index(const std::string& name) const {
    for (std::size_t i = 0; i < alphabet_.size(); ++i)
        if (alphabet_[i] == name)
            return static_cast<int>(i);
    throw mismatch_error("symbol '" + name + "' is not in the channel alphabet");
}

std::vector<int> ChannelModel::context_of(const History& h) const {
    std::size_t len = std::min<std::size_t>(order_, h.size());
    return std::vector<int>(h.end() - len, h.end());
}

const ChannelModel::Row& ChannelModel::row_entry(const std::vector<int>& context) const {
    auto it = rows_.find(context);
    if (it == rows_.end())
        throw input_error("no row for the requested context");
    return it->second;
}

const DistQ& ChannelModel::row(const History& h) const {
    return row_entry(context_of(h)).exact;
}

int ChannelModel::sample(const History& h, std::mt19937_64& rng) const {
    const Row& r = row_entry(context_of(h));
    double u = uniform01(rng);
    auto it = std::upper_bound(r.cdf.begin(), r.cdf.end(), u);
    if (it == r.cdf.end())
        --it;
    return static_cast<int>(it - r.cdf.begin());
}

std::vector<int> ChannelModel::sample_block(const History& h, int t, std::mt19937_64& rng) const {
    History local = h;
    std::vector<int> block;
    block.reserve(t);
    for (int i = 0; i < t; ++i) {
        int s = sample(local, rng);
        block.push_back(s);
        local.push_back(s);
    }
    return block;
}

BlockDistribution ChannelModel::marginal_block(const History& h, int t,
                                               std::uint64_t outcome_cap) const {
    if (t < 1)
        throw input_error("block length must be >= 1");
    std::uint64_t outcomes = 1;
    for (int i = 0; i < t; ++i) {
        outcomes *= alphabet_.size();
        if (outcomes > outcome_cap)
            throw cap_error("marginal block enumeration exceeds the outcome cap");
    }

    BlockDistribution out;
    out.t = t;
    out.dist = DistQ(outcomes);

    // Depth-first chain over symbols; index digits are big-endian so the
    // first symbol is the most significant.
    History local = h;
    auto walk = [&](auto&& self, int depth, std::uint64_t index, const Rat& mass) -> void {
        if (depth == t) {
            out.dist.mass[index] = mass;
            return;
        }
        const Row& r = row_entry(context_of(local));
        for (int sym = 0; sym < alphabet_size(); ++sym) {
            Rat next = mass * r.exact.mass[sym];
            local.push_back(sym);
            self(self, depth + 1, index * alphabet_.size() + sym, next);
            local.pop_back();
        }
    };
    walk(walk, 0, 0, Rat(1));
    return out;
}

} // namespace stegokit
