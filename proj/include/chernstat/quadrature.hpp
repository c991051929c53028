#pragma once

#include <cstddef>
#include <vector>

namespace chernstat {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(std::size_t n);

/// Legendre polynomial P_l(x) by three-term recurrence.
double legendre_p(int l, double x);

}  // namespace chernstat
