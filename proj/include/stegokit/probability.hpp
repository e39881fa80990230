#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "stegokit/errors.hpp"
#include "stegokit/rational.hpp"

namespace stegokit {

// Finite distribution over support {0, ..., N-1}. T is double for the Monte
// Carlo lane or Rat for the exact lane. Mass entries must lie in [0,1] and
// sum to 1 (exactly for Rat, within 1e-12 for double); validate() enforces
// this, construction does not.
template <typename T>
struct Dist {
    std::vector<T> mass;

    Dist() = default;
    explicit Dist(std::size_t n) : mass(n, T(0)) {}
    explicit Dist(std::vector<T> m) : mass(std::move(m)) {}

    std::size_t size() const { return mass.size(); }

    static Dist uniform(std::size_t n) {
        Dist d(n);
        for (auto& v : d.mass)
            v = T(1) / T(static_cast<long>(n));
        return d;
    }

    static Dist point(std::size_t n, std::size_t at) {
        Dist d(n);
        d.mass.at(at) = T(1);
        return d;
    }

    void validate() const {
        if (mass.empty())
            throw input_error("distribution with empty support");
        T sum(0);
        for (const auto& v : mass) {
            if (v < T(0) || v > T(1))
                throw input_error("distribution mass outside [0,1]");
            sum += v;
        }
        if constexpr (std::is_same_v<T, Rat>) {
            if (sum != Rat(1))
                throw input_error("distribution mass does not sum to 1");
        } else {
            if (std::abs(sum - 1.0) > 1e-12)
                throw input_error("distribution mass does not sum to 1");
        }
    }
};

using DistD = Dist<double>;
using DistQ = Dist<Rat>;

template <typename T>
struct BiasReport {
    T max_deviation;           // max over outputs y of |Pr[f(X)=y] - 1/|Y||
    std::size_t worst_output;  // smallest index attaining it
};

namespace detail {
inline double to_dbl(double v) { return v; }
inline double to_dbl(const Rat& v) { return rat_to_double(v); }
template <typename T>
T abs_of(const T& v) {
    return v < T(0) ? T(-v) : v;
}
} // namespace detail

// -log2 of the largest mass; zero-mass entries are skipped so sparse rows
// over a full alphabet are fine.
template <typename T>
double min_entropy(const Dist<T>& d) {
    bool any = false;
    T best(0);
    for (const auto& v : d.mass) {
        if (v > T(0)) {
            if (!any || v > best)
                best = v;
            any = true;
        }
    }
    if (!any)
        throw input_error("min-entropy of all-zero distribution");
    return -std::log2(detail::to_dbl(best));
}

template <typename T>
T statistical_distance(const Dist<T>& p, const Dist<T>& q) {
    if (p.size() != q.size())
        throw input_error("statistical distance over mismatched supports");
    T acc(0);
    for (std::size_t i = 0; i < p.size(); ++i)
        acc += detail::abs_of<T>(p.mass[i] - q.mass[i]);
    return acc / T(2);
}

// Largest |P(S)-Q(S)| over events S, attained by S = {i : p[i] < q[i]}; the
// value always equals statistical_distance(p, q).
template <typename T>
std::pair<T, std::vector<std::size_t>> worst_event_distance(const Dist<T>& p, const Dist<T>& q) {
    if (p.size() != q.size())
        throw input_error("worst event over mismatched supports");
    T gain(0);
    std::vector<std::size_t> event;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.mass[i] < q.mass[i]) {
            gain += q.mass[i] - p.mass[i];
            event.push_back(i);
        }
    }
    return {gain, event};
}

template <typename T>
Dist<T> pushforward(const std::vector<std::size_t>& f, const Dist<T>& d, std::size_t output_count) {
    if (f.size() != d.size())
        throw input_error("pushforward map not total on support");
    if (output_count < 1)
        throw input_error("pushforward needs at least one output");
    Dist<T> out(output_count);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (f[i] >= output_count)
            throw input_error("pushforward map value out of range");
        out.mass[f[i]] += d.mass[i];
    }
    return out;
}

template <typename T>
BiasReport<T> bias_of(const std::vector<std::size_t>& f, const Dist<T>& d, std::size_t output_count) {
    Dist<T> push = pushforward(f, d, output_count);
    T unif = T(1) / T(static_cast<long>(output_count));
    BiasReport<T> rep{T(0), 0};
    for (std::size_t y = 0; y < output_count; ++y) {
        T dev = detail::abs_of<T>(push.mass[y] - unif);
        if (dev > rep.max_deviation) {
            rep.max_deviation = dev;
            rep.worst_output = y;
        }
    }
    return rep;
}

} // namespace stegokit
