#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace hdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// Reentrant log|Γ(x)|; safe to call from concurrent chains.
double log_gamma(double x);

/// log Σ exp(v) with the max factored out. Returns -inf for an empty span or
/// when every entry is -inf.
double log_sum_exp(std::span<const double> log_values);

}  // namespace hdp
