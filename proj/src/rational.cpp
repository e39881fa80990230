#include "stegokit/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace stegokit {

Rat rat_from_decimal(const std::string& text) {
    if (text.empty())
        throw input_error("empty decimal literal");
    std::size_t pos = 0;
    bool neg = false;
    if (text[pos] == '+' || text[pos] == '-') {
        neg = (text[pos] == '-');
        ++pos;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_digit = false, seen_dot = false;
    for (; pos < text.size(); ++pos) {
        char ch = text[pos];
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            digits.push_back(ch);
            seen_digit = true;
            if (seen_dot)
                ++frac_digits;
        } else if (ch == '.') {
            if (seen_dot)
                throw input_error("malformed decimal literal: " + text);
            seen_dot = true;
        } else if (ch == 'e' || ch == 'E') {
            break;
        } else {
            throw input_error("malformed decimal literal: " + text);
        }
    }
    if (!seen_digit)
        throw input_error("malformed decimal literal: " + text);
    long exp10 = 0;
    if (pos < text.size()) { // exponent part
        char* end = nullptr;
        exp10 = std::strtol(text.c_str() + pos + 1, &end, 10);
        if (end != text.c_str() + text.size() || end == text.c_str() + pos + 1)
            throw input_error("malformed decimal literal: " + text);
    }
    mpz_class num(digits.empty() ? "0" : digits, 10);
    if (neg)
        num = -num;
    long shift = exp10 - frac_digits;
    mpz_class den = 1;
    if (shift >= 0) {
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(shift));
        num *= scale;
    } else {
        mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(-shift));
    }
    Rat q(num, den);
    q.canonicalize();
    return q;
}

double rat_to_double(const Rat& q) {
    return q.get_d();
}

Rat rat_pow(const Rat& q, std::uint64_t e) {
    Rat acc = 1, base = q;
    while (e) {
        if (e & 1)
            acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

Rat rat_dyadic(std::uint64_t num, unsigned k) {
    mpz_class den = 1;
    den <<= k;
    Rat q(mpz_class(static_cast<unsigned long>(num)), den);
    q.canonicalize();
    return q;
}

} // namespace stegokit
