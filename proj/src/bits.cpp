#include "stegokit/bits.hpp"

#include <bit>

#include "stegokit/errors.hpp"

namespace stegokit {

namespace {

int hex_val(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

BitVec BitVec::xor_with(const BitVec& o) const {
    if (nbits_ != o.nbits_)
        throw input_error("bit string length mismatch in xor");
    BitVec r(nbits_);
    for (std::size_t w = 0; w < words_.size(); ++w)
        r.words_[w] = words_[w] ^ o.words_[w];
    return r;
}

bool BitVec::dot(const BitVec& mask) const {
    if (nbits_ != mask.nbits_)
        throw input_error("bit string length mismatch in dot");
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words_.size(); ++w)
        acc ^= words_[w] & mask.words_[w];
    return std::popcount(acc) & 1;
}

std::uint64_t BitVec::to_u64() const {
    if (nbits_ > 64)
        throw input_error("bit string too long for u64 packing");
    return words_.empty() ? 0 : words_[0];
}

BitVec BitVec::from_u64(std::uint64_t value, std::size_t nbits) {
    if (nbits > 64)
        throw input_error("bit string too long for u64 packing");
    BitVec v(nbits);
    if (nbits) {
        std::uint64_t mask = nbits == 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << nbits) - 1);
        v.words_[0] = value & mask;
    }
    return v;
}

std::string BitVec::to_hex() const {
    std::size_t nbytes = (nbits_ + 7) / 8;
    std::vector<std::uint8_t> bytes(nbytes, 0);
    std::size_t offset = 8 * nbytes - nbits_; // zero padding occupies the top bits
    for (std::size_t j = 0; j < nbits_; ++j) {
        if (get(j))
            bytes[(offset + j) / 8] |= std::uint8_t(1) << (7 - (offset + j) % 8);
    }
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * nbytes);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 15]);
    }
    return out;
}

BitVec BitVec::from_hex(const std::string& hex, std::size_t nbits) {
    std::size_t nbytes = (nbits + 7) / 8;
    if (hex.size() != 2 * nbytes)
        throw input_error("hex string has wrong length for " + std::to_string(nbits) + " bits");
    std::vector<std::uint8_t> bytes(nbytes, 0);
    for (std::size_t i = 0; i < nbytes; ++i) {
        int hi = hex_val(hex[2 * i]), lo = hex_val(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw input_error("invalid hex digit in bit string");
        bytes[i] = std::uint8_t(hi << 4 | lo);
    }
    std::size_t offset = 8 * nbytes - nbits;
    for (std::size_t p = 0; p < offset; ++p) {
        if ((bytes[p / 8] >> (7 - p % 8)) & 1)
            throw input_error("nonzero padding bits in hex bit string");
    }
    BitVec v(nbits);
    for (std::size_t j = 0; j < nbits; ++j)
        v.set(j, (bytes[(offset + j) / 8] >> (7 - (offset + j) % 8)) & 1);
    return v;
}

std::string BitVec::to_bits_string() const {
    std::string s;
    s.reserve(nbits_);
    for (std::size_t j = 0; j < nbits_; ++j)
        s.push_back(get(j) ? '1' : '0');
    return s;
}

BitVec BitVec::from_bits_string(const std::string& s) {
    BitVec v(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == '1')
            v.set(j, true);
        else if (s[j] != '0')
            throw input_error("bit string may contain only '0' and '1'");
    }
    return v;
}

BitVec BitVec::random(std::size_t nbits, std::mt19937_64& rng) {
    BitVec v(nbits);
    for (std::size_t w = 0; w < v.words_.size(); ++w)
        v.words_[w] = rng();
    if (nbits & 63)
        v.words_.back() &= (std::uint64_t(1) << (nbits & 63)) - 1;
    return v;
}

} // namespace stegokit
