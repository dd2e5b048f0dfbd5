#pragma once

#include <vector>

namespace thinhom {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule, n >= 1.
[[nodiscard]] const GaussRule& gauss_legendre(int n);

}  // namespace thinhom
