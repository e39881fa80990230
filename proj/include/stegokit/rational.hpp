#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "stegokit/errors.hpp"

namespace stegokit {

// Exact rational scalar used by the enumeration lane. Monte Carlo code uses
// plain double; conversion points between the two lanes are explicit.
using Rat = mpq_class;

// Parses a non-negative decimal literal ("0.53", "1", ".25", "7e-3") into an
// exact rational. This is the only sanctioned way probabilities enter the
// exact lane; binary floating point never touches them.
Rat rat_from_decimal(const std::string& text);

double rat_to_double(const Rat& q);

// q^e for e >= 0.
Rat rat_pow(const Rat& q, std::uint64_t e);

// Exact value num/2^k, used for uniform masses and dyadic thresholds.
Rat rat_dyadic(std::uint64_t num, unsigned k);

} // namespace stegokit
