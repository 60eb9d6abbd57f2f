#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace hdp {

using Rng = std::mt19937_64;

/// Engine for stream `stream` of a run seeded with `seed`. Distinct streams
/// are decorrelated through std::seed_seq, so parallel chains can share one
/// configured seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform draw on the open interval (0, 1).
double uniform01(Rng& rng);

double sample_normal(Rng& rng);

std::int64_t sample_poisson(double mean, Rng& rng);

/// Gamma(shape, rate) variate.
///
/// Marsaglia and Tsang's squeeze method for shape >= 1. For shape < 1 the
/// draw is boosted: X = Y * U^(1/shape) with Y ~ Gamma(shape + 1), which is
/// exact and keeps the small-shape path on the same rejection sampler.
double sample_gamma(double shape, double rate, Rng& rng);

/// Categorical draw from unnormalized log weights.
///
/// One uniform, inverse CDF over the max-shifted exponentiated weights. If
/// rounding leaves the target above the running sum, the last index wins.
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);

}  // namespace hdp
