#include "hdp/random.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace hdp {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

double uniform01(Rng& rng) {
    // 53 random bits, shifted by half a step so neither endpoint is reachable.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

std::int64_t sample_poisson(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

double sample_gamma(double shape, double rate, Rng& rng) {
    assert(shape > 0.0 && rate > 0.0);
    if (shape < 1.0) {
        const double boost = std::pow(uniform01(rng), 1.0 / shape);
        return sample_gamma(shape + 1.0, rate, rng) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = 0.0;
        double v = 0.0;
        do {
            z = sample_normal(rng);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v / rate;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
    assert(!log_weights.empty());
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    assert(top > -std::numeric_limits<double>::infinity());
    double total = 0.0;
    for (double w : log_weights) total += std::exp(w - top);
    const double target = uniform01(rng) * total;
    double running = 0.0;
    for (std::size_t k = 0; k + 1 < log_weights.size(); ++k) {
        running += std::exp(log_weights[k] - top);
        if (target < running) return k;
    }
    return log_weights.size() - 1;
}

}  // namespace hdp
