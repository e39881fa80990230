#include "stegokit/sampling.hpp"

#include "stegokit/errors.hpp"

namespace stegokit {

void RejSamConfig::validate() const {
    if (rho < 0)
        throw input_error("retry bound must be >= 0");
    if (t < 1)
        throw input_error("block length must be >= 1");
    if (eta < 1 || eta > 62)
        throw input_error("target width must lie in [1, 62]");
}

std::vector<int> block_symbols(std::uint64_t index, int t, int alphabet_size) {
    std::vector<int> out(t);
    for (int i = t - 1; i >= 0; --i) {
        out[i] = static_cast<int>(index % alphabet_size);
        index /= alphabet_size;
    }
    if (index != 0)
        throw input_error("block index out of range for given length");
    return out;
}

std::uint64_t block_index(const std::vector<int>& symbols, int alphabet_size) {
    std::uint64_t index = 0;
    for (int s : symbols) {
        if (s < 0 || s >= alphabet_size)
            throw input_error("symbol index out of range");
        index = index * alphabet_size + static_cast<std::uint64_t>(s);
    }
    return index;
}

namespace {

void check_map_output(std::uint64_t y, int eta) {
    if (y >> eta)
        throw input_error("block map output exceeds the target width");
}

} // namespace

RejSamDraw rejsam(const RejSamConfig& cfg, std::uint64_t target, const ChannelModel& c,
                  const History& h, const BlockMap& f, std::mt19937_64& rng) {
    cfg.validate();
    check_map_output(target, cfg.eta);
    for (long long j = 1; j <= cfg.rho; ++j) {
        RejSamDraw draw{c.sample_block(h, cfg.t, rng), j};
        std::uint64_t y = f(draw.symbols);
        check_map_output(y, cfg.eta);
        if (y == target)
            return draw;
    }
    return RejSamDraw{c.sample_block(h, cfg.t, rng), cfg.rho + 1};
}

RejSamWeights rejsam_weights(const Rat& target_mass, long long rho) {
    if (target_mass < 0 || target_mass > 1)
        throw input_error("target mass must lie in [0, 1]");
    if (rho > 100000)
        throw cap_error("retry bound too large for exact analysis");
    Rat miss = Rat(1) - target_mass;
    RejSamWeights w;
    for (long long j = 1; j <= rho; ++j) {
        w.accept += w.final_weight;
        w.final_weight *= miss;
    }
    return w;
}

DistQ block_pushforward(const RejSamConfig& cfg, const ChannelModel& c, const History& h,
                        const BlockMap& f, std::uint64_t outcome_cap) {
    cfg.validate();
    BlockDistribution base = c.marginal_block(h, cfg.t, outcome_cap);
    DistQ push(std::size_t(1) << cfg.eta);
    for (std::uint64_t idx = 0; idx < base.dist.size(); ++idx) {
        std::uint64_t y = f(block_symbols(idx, cfg.t, c.alphabet_size()));
        check_map_output(y, cfg.eta);
        push.mass[y] += base.dist.mass[idx];
    }
    return push;
}

BlockDistribution rejsam_exact_distribution(const RejSamConfig& cfg, std::uint64_t target,
                                            const ChannelModel& c, const History& h,
                                            const BlockMap& f, std::uint64_t outcome_cap) {
    cfg.validate();
    check_map_output(target, cfg.eta);
    BlockDistribution base = c.marginal_block(h, cfg.t, outcome_cap);
    std::uint64_t outcomes = base.dist.size();

    std::vector<char> hit(outcomes);
    Rat target_mass = 0;
    for (std::uint64_t idx = 0; idx < outcomes; ++idx) {
        std::uint64_t y = f(block_symbols(idx, cfg.t, c.alphabet_size()));
        check_map_output(y, cfg.eta);
        hit[idx] = (y == target);
        if (hit[idx])
            target_mass += base.dist.mass[idx];
    }

    RejSamWeights w = rejsam_weights(target_mass, cfg.rho);
    Rat accepted = w.accept + w.final_weight;
    BlockDistribution out;
    out.t = cfg.t;
    out.dist = DistQ(outcomes);
    for (std::uint64_t idx = 0; idx < outcomes; ++idx)
        out.dist.mass[idx] = base.dist.mass[idx] * (hit[idx] ? accepted : w.final_weight);
    out.dist.validate();
    return out;
}

BlockDistribution rejsam_mixture_distribution(const RejSamConfig& cfg, const ChannelModel& c,
                                              const History& h, const BlockMap& f,
                                              const DistQ& target_dist,
                                              std::uint64_t outcome_cap) {
    cfg.validate();
    if (target_dist.size() != std::size_t(1) << cfg.eta)
        throw input_error("target distribution must cover all eta-bit values");
    target_dist.validate();

    BlockDistribution base = c.marginal_block(h, cfg.t, outcome_cap);
    std::uint64_t outcomes = base.dist.size();

    std::vector<std::uint64_t> image(outcomes);
    DistQ push(target_dist.size());
    for (std::uint64_t idx = 0; idx < outcomes; ++idx) {
        std::uint64_t y = f(block_symbols(idx, cfg.t, c.alphabet_size()));
        check_map_output(y, cfg.eta);
        image[idx] = y;
        push.mass[y] += base.dist.mass[idx];
    }

    // mixture(c) = p_c * (u(y) * accept_y + sum_m u(m) * final_m), y = f(c)
    std::vector<Rat> accept(target_dist.size());
    Rat final_mix = 0;
    for (std::size_t m = 0; m < target_dist.size(); ++m) {
        RejSamWeights w = rejsam_weights(push.mass[m], cfg.rho);
        accept[m] = w.accept;
        final_mix += target_dist.mass[m] * w.final_weight;
    }

    BlockDistribution out;
    out.t = cfg.t;
    out.dist = DistQ(outcomes);
    for (std::uint64_t idx = 0; idx < outcomes; ++idx) {
        std::uint64_t y = image[idx];
        out.dist.mass[idx] =
            base.dist.mass[idx] * (target_dist.mass[y] * accept[y] + final_mix);
    }
    out.dist.validate();
    return out;
}

} // namespace stegokit
