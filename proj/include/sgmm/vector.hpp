#pragma once

#include "errors.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sgmm {

using Vector = std::vector<double>;

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("squared_distance: vectors differ in length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

/// alpha * a + (1 - alpha) * b
inline Vector weighted_center(std::span<const double> a, std::span<const double> b, double alpha) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("weighted_center: vectors differ in length");
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = alpha * a[i] + (1.0 - alpha) * b[i];
    }
    return out;
}

} // namespace sgmm
