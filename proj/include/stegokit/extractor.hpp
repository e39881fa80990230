#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "stegokit/bits.hpp"
#include "stegokit/probability.hpp"

namespace stegokit {

// Parameters of a (k, eps)-strong extractor Ext: {0,1}^n x {0,1}^d -> {0,1}^m.
// The instantiation is Toeplitz hashing, whose leftover-hash guarantee makes
// any declaration with m <= k - 2*log2(1/eps) sound (it actually achieves
// eps/2); d = n + m - 1 is forced by the construction.
struct ExtractorParams {
    int n = 0;
    int k = 0;
    int d = 0;
    int m = 0;
    double eps = 0.0;

    void validate() const;
};

ExtractorParams make_extractor_params(int n, int k, int m, double eps);

// Wire-format commitment for the seed-to-matrix mapping: the m x n Toeplitz
// matrix T has first row T[0][j] = s[j] for j in [0,n), and first column
// below it T[i][0] = s[n+i-1] for i in [1,m); diagonals are constant
// (T[i][j] = T[i-1][j-1]). Input bit j of x multiplies column j; output bit
// i is the GF(2) inner product of row i with x.
BitVec extract(const ExtractorParams& p, const BitVec& seed, const BitVec& x);

// Same map with bit strings packed little-endian into integers (bit j at the
// 2^j place). Requires n, d <= 64. Used by enumeration loops.
std::uint64_t extract_u64(const ExtractorParams& p, std::uint64_t seed, std::uint64_t x);

// Exact Delta[U_d . Ext(src, U_d), U_{m+d}] by full enumeration over all 2^d
// seeds and the source support. src is a distribution over n-bit strings
// (index = little-endian packing). op_cap bounds 2^d * |support|.
Rat verify_strong_extractor(const ExtractorParams& p, const DistQ& src,
                            std::uint64_t op_cap = std::uint64_t(1) << 26);

struct SeedQuality {
    Rat fraction;              // seeds with Delta[Ext(src,s), U_m] >= threshold
    std::uint64_t seeds_total = 0;
    std::uint64_t seeds_checked = 0;
    bool exact = true;         // false when seeds were sampled
    double ci_halfwidth = 0.0; // 95% normal approximation, sampled mode only
};

// Fraction of seeds whose per-seed output distance reaches a threshold tau.
// tau is passed as tau^4 so that thresholds like sqrt(eps) with eps itself a
// square root stay exactly representable; the test runs as Delta^4 >=
// tau_pow4 in rational arithmetic. Enumerates all seeds when
// d <= max_enum_log2_seeds, else samples 2^max_enum_log2_seeds seeds.
SeedQuality seed_quality_histogram(const ExtractorParams& p, const DistQ& src,
                                   const Rat& tau_pow4, std::mt19937_64& rng,
                                   int max_enum_log2_seeds = 16);

} // namespace stegokit
