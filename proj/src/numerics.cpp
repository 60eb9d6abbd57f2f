#include "hdp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdp {

double log_gamma(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_sum_exp(std::span<const double> log_values) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (log_values.empty()) return kNegInf;
    const double top = *std::max_element(log_values.begin(), log_values.end());
    if (top == kNegInf) return kNegInf;
    if (std::isinf(top)) return top;
    double acc = 0.0;
    for (double v : log_values) acc += std::exp(v - top);
    return top + std::log(acc);
}

}  // namespace hdp
