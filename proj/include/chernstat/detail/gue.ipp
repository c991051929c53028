#pragma once

#include <cmath>
#include <random>

namespace chernstat {

template <typename Rng>
HermitianMatrix draw_gue(Rng& rng, int dim)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double half = std::sqrt(0.5);
    HermitianMatrix h(dim, dim);
    for (int i = 0; i < dim; ++i) {
        h(i, i) = normal(rng);
        for (int j = i + 1; j < dim; ++j) {
            const double re = half * normal(rng);
            const double im = half * normal(rng);
            h(i, j) = {re, im};
            h(j, i) = {re, -im};
        }
    }
    return h;
}

}  // namespace chernstat
