#include "stegokit/extractor.hpp"

#include <bit>
#include <cmath>

#include "stegokit/errors.hpp"

namespace stegokit {

void ExtractorParams::validate() const {
    if (m < 1)
        throw input_error("extractor output length must be >= 1");
    if (k > n)
        throw input_error("min-entropy threshold k exceeds source length n");
    if (k < 1)
        throw input_error("min-entropy threshold k must be >= 1");
    if (d != n + m - 1)
        throw input_error("Toeplitz seed length must be n + m - 1");
    if (!(eps > 0.0) || eps > 1.0)
        throw input_error("extractor error must lie in (0, 1]");
    // Entropy-loss constraint with the O(1) fixed to 0; 1e-9 absorbs the
    // float evaluation of log2.
    if (static_cast<double>(m) > static_cast<double>(k) - 2.0 * std::log2(1.0 / eps) + 1e-9)
        throw input_error("output length violates m <= k - 2*log2(1/eps)");
}

ExtractorParams make_extractor_params(int n, int k, int m, double eps) {
    ExtractorParams p;
    p.n = n;
    p.k = k;
    p.m = m;
    p.d = n + m - 1;
    p.eps = eps;
    p.validate();
    return p;
}

BitVec extract(const ExtractorParams& p, const BitVec& seed, const BitVec& x) {
    if (static_cast<int>(seed.size()) != p.d)
        throw input_error("seed length does not match d");
    if (static_cast<int>(x.size()) != p.n)
        throw input_error("input length does not match n");

    BitVec out(p.m);
    BitVec row(p.n);
    for (int j = 0; j < p.n; ++j)
        row.set(j, seed.get(j));
    for (int i = 0; i < p.m; ++i) {
        if (i > 0) {
            // Next row shifts the previous one down the diagonal and pulls
            // its new leading entry from the column bits.
            for (int j = p.n - 1; j >= 1; --j)
                row.set(j, row.get(j - 1));
            row.set(0, seed.get(p.n + i - 1));
        }
        out.set(i, x.dot(row));
    }
    return out;
}

std::uint64_t extract_u64(const ExtractorParams& p, std::uint64_t seed, std::uint64_t x) {
    std::uint64_t n_mask = p.n == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << p.n) - 1;
    std::uint64_t row = seed & n_mask;
    std::uint64_t in = x & n_mask;
    std::uint64_t out = 0;
    for (int i = 0; i < p.m; ++i) {
        if (i > 0)
            row = ((row << 1) | ((seed >> (p.n + i - 1)) & 1)) & n_mask;
        out |= std::uint64_t(std::popcount(row & in) & 1) << i;
    }
    return out;
}

Rat verify_strong_extractor(const ExtractorParams& p, const DistQ& src, std::uint64_t op_cap) {
    p.validate();
    // Instance-size caps come before source checks: a too-large declaration
    // must fail fast even when no source of the right size can exist.
    if (p.d >= 40 || p.n > 60)
        throw cap_error("extractor verification instance too large");
    if (src.size() != (std::size_t(1) << p.n))
        throw input_error("source support must cover all n-bit strings");
    src.validate();
    {
        // min_entropy(src) >= k, checked exactly: max mass <= 2^-k.
        Rat bound = rat_dyadic(1, p.k);
        for (const auto& mass : src.mass)
            if (mass > bound)
                throw input_error("source min-entropy below the k threshold");
    }

    std::uint64_t support = 0;
    for (const auto& mass : src.mass)
        if (mass > 0)
            ++support;
    std::uint64_t seeds = std::uint64_t(1) << p.d;
    if (seeds * support > op_cap)
        throw cap_error("extractor verification exceeds the enumeration cap");

    // Joint distribution over (seed, output) with seed uniform.
    std::vector<Rat> joint(std::uint64_t(1) << (p.m + p.d));
    Rat seed_mass = rat_dyadic(1, p.d);
    for (std::uint64_t s = 0; s < seeds; ++s) {
        for (std::uint64_t x = 0; x < src.mass.size(); ++x) {
            if (src.mass[x] == 0)
                continue;
            std::uint64_t y = extract_u64(p, s, x);
            joint[(s << p.m) | y] += seed_mass * src.mass[x];
        }
    }
    Rat unif = rat_dyadic(1, p.m + p.d);
    Rat acc = 0;
    for (const auto& mass : joint) {
        Rat diff = mass - unif;
        acc += diff < 0 ? Rat(-diff) : diff;
    }
    return Rat(acc / 2);
}

SeedQuality seed_quality_histogram(const ExtractorParams& p, const DistQ& src,
                                   const Rat& tau_pow4, std::mt19937_64& rng,
                                   int max_enum_log2_seeds) {
    p.validate();
    if (p.n > 24)
        throw cap_error("seed histogram instance too large");
    if (src.size() != (std::size_t(1) << p.n))
        throw input_error("source support must cover all n-bit strings");
    src.validate();
    if (tau_pow4 <= 0)
        throw input_error("threshold must be positive");

    SeedQuality q;
    q.seeds_total = std::uint64_t(1) << std::min(p.d, 63);
    bool enumerate = p.d <= max_enum_log2_seeds;
    std::uint64_t checked = enumerate ? q.seeds_total : (std::uint64_t(1) << max_enum_log2_seeds);
    q.exact = enumerate;
    q.seeds_checked = checked;

    Rat unif = rat_dyadic(1, p.m);
    std::vector<Rat> outmass(std::size_t(1) << p.m);
    std::uint64_t hits = 0;
    std::uint64_t seed_mask = p.d == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << p.d) - 1;
    for (std::uint64_t i = 0; i < checked; ++i) {
        std::uint64_t s = enumerate ? i : (rng() & seed_mask);
        std::fill(outmass.begin(), outmass.end(), Rat(0));
        for (std::uint64_t x = 0; x < src.mass.size(); ++x) {
            if (src.mass[x] == 0)
                continue;
            outmass[extract_u64(p, s, x)] += src.mass[x];
        }
        Rat acc = 0;
        for (std::size_t y = 0; y < outmass.size(); ++y) {
            Rat diff = outmass[y] - unif;
            acc += diff < 0 ? Rat(-diff) : diff;
        }
        Rat dist(acc / 2);
        Rat sq(dist * dist);
        // dist >= tau compared exactly as dist^4 >= tau^4
        if (sq * sq >= tau_pow4)
            ++hits;
    }
    q.fraction = Rat(static_cast<unsigned long>(hits), static_cast<unsigned long>(checked));
    q.fraction.canonicalize();
    if (!enumerate) {
        double frac = rat_to_double(q.fraction);
        q.ci_halfwidth = 1.96 * std::sqrt(std::max(frac * (1.0 - frac), 1e-12) /
                                          static_cast<double>(checked));
    }
    return q;
}

} // namespace stegokit
