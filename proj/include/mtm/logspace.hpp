#ifndef MTM_LOGSPACE_HPP
#define MTM_LOGSPACE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace mtm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b)
{
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// log(sum_i exp(v_i)); kNegInf for an empty span or all-(-inf) input.
// Two-pass max/sum, accumulated left to right so results do not depend
// on the caller's thread count.
inline double log_sum_exp(std::span<const double> values)
{
    double hi = kNegInf;
    for (double v : values) hi = std::max(hi, v);
    if (hi == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - hi);
    return hi + std::log(sum);
}

}  // namespace mtm

#endif  // MTM_LOGSPACE_HPP
