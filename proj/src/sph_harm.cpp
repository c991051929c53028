#include "chernstat/sph_harm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chernstat {

namespace {

// Q_lm storage reuses the basis layout at the m >= 0 slot.
inline int qidx(int l, int m) { return l * l + l + m; }

}  // namespace

RealSphHarmBasis::RealSphHarmBasis(int l_max) : l_max_(l_max)
{
    if (l_max < 0)
        throw std::invalid_argument("RealSphHarmBasis: negative degree");
    const int n = size();
    a_.assign(n, 0.0);
    b_.assign(n, 0.0);
    diag_.assign(l_max + 1, 0.0);
    diag_[0] = std::sqrt(1.0 / (4.0 * std::numbers::pi));
    for (int m = 1; m <= l_max; ++m)
        diag_[m] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    for (int m = 0; m <= l_max; ++m) {
        for (int l = m + 2; l <= l_max; ++l) {
            const double l2 = static_cast<double>(l) * l;
            const double m2 = static_cast<double>(m) * m;
            const double lm1 = l - 1.0;
            a_[qidx(l, m)] = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
            b_[qidx(l, m)] = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
        }
    }
}

void RealSphHarmBasis::evaluate(const Eigen::Vector3d& p, std::span<double> out) const
{
    if (static_cast<int>(out.size()) < size())
        throw std::invalid_argument("RealSphHarmBasis::evaluate: output too small");

    const double x = p.x();
    const double y = p.y();
    const double z = p.z();
    const double root2 = std::numbers::sqrt2;

    double qmm = 0.0;
    double re = 1.0;  // Re (x + iy)^m
    double im = 0.0;  // Im (x + iy)^m
    for (int m = 0; m <= l_max_; ++m) {
        qmm = (m == 0) ? diag_[0] : qmm * diag_[m];
        if (m > 0) {
            const double nre = re * x - im * y;
            const double nim = re * y + im * x;
            re = nre;
            im = nim;
        }
        const double cs = (m == 0) ? 1.0 : root2 * re;
        const double sn = root2 * im;

        double q_prev2 = qmm;
        auto store = [&](int l, double q) {
            out[l * l + l + m] = q * cs;
            if (m > 0)
                out[l * l + l - m] = q * sn;
        };
        store(m, qmm);
        if (m + 1 > l_max_)
            continue;
        double q_prev1 = std::sqrt(2.0 * m + 3.0) * z * qmm;
        store(m + 1, q_prev1);
        for (int l = m + 2; l <= l_max_; ++l) {
            const int k = qidx(l, m);
            const double q = a_[k] * (z * q_prev1 - b_[k] * q_prev2);
            store(l, q);
            q_prev2 = q_prev1;
            q_prev1 = q;
        }
    }
}

Eigen::MatrixXd RealSphHarmBasis::evaluate_many(std::span<const Eigen::Vector3d> points) const
{
    Eigen::MatrixXd values(size(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j)
        evaluate(points[j], std::span<double>(values.col(static_cast<Eigen::Index>(j)).data(),
                                              static_cast<std::size_t>(size())));
    return values;
}

}  // namespace chernstat
