#pragma once

#include <algorithm>
#include <cstddef>
#include <cmath>
#include <vector>

#include "trilayer/errors.hpp"

namespace trilayer::stats {

// Quantile by linear interpolation on an ascending-sorted series:
// rank h = (n-1)*p, value = s[floor(h)] + frac(h) * (s[floor(h)+1] - s[floor(h)]).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of empty series");
    if (sorted.size() == 1) return sorted[0];
    double h = static_cast<double>(sorted.size() - 1) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

inline double mean(const std::vector<double>& values) {
    if (values.empty()) throw DataError("mean of empty series");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace trilayer::stats
