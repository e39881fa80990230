#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace stegokit {

// Fixed-length bit string. Bit 0 is the first bit of the string; helpers
// that pack bits into integers use bit i as the 2^i place (little-endian)
// unless stated otherwise.
class BitVec {
  public:
    BitVec() = default;
    explicit BitVec(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    std::size_t size() const { return nbits_; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i, bool v) {
        std::uint64_t mask = std::uint64_t(1) << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    bool operator==(const BitVec& o) const { return nbits_ == o.nbits_ && words_ == o.words_; }
    bool operator!=(const BitVec& o) const { return !(*this == o); }

    BitVec xor_with(const BitVec& o) const;

    // Parity of the AND with a mask of equal length (GF(2) inner product).
    bool dot(const BitVec& mask) const;

    // Low 64 bits packed as an integer, bit i at the 2^i place. Requires
    // size() <= 64.
    std::uint64_t to_u64() const;
    static BitVec from_u64(std::uint64_t value, std::size_t nbits);

    // Wire format: lowercase hex, first bit of the string is the most
    // significant bit of the value, ceil(n/8) bytes, zero padding in the
    // high-order positions when n is not a byte multiple.
    std::string to_hex() const;
    static BitVec from_hex(const std::string& hex, std::size_t nbits);

    // ASCII form, one '0'/'1' per bit, first bit first.
    std::string to_bits_string() const;
    static BitVec from_bits_string(const std::string& s);

    static BitVec random(std::size_t nbits, std::mt19937_64& rng);

  private:
    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace stegokit
