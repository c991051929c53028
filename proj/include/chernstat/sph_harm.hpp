#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace chernstat {

/// Real, orthonormal spherical harmonics up to a fixed degree.
///
/// Basis functions are ordered l*l + l + m for m in [-l, l], with cosine
/// terms at m > 0 and sine terms at m < 0, no Condon-Shortley phase.
/// The associated Legendre factor is evaluated with sin^m(theta) pulled out
/// and recombined as Re/Im (x + iy)^m, which keeps the recurrence stable at
/// the poles and free of trigonometric calls.
class RealSphHarmBasis {
public:
    explicit RealSphHarmBasis(int l_max);

    int l_max() const { return l_max_; }
    int size() const { return (l_max_ + 1) * (l_max_ + 1); }
    static int index(int l, int m) { return l * l + l + m; }

    /// Writes all basis values at unit vector p into out (length size()).
    void evaluate(const Eigen::Vector3d& p, std::span<double> out) const;

    /// Column j holds the basis values at points[j].
    Eigen::MatrixXd evaluate_many(std::span<const Eigen::Vector3d> points) const;

private:
    int l_max_;
    std::vector<double> a_;  // recurrence coefficients, indexed like the basis
    std::vector<double> b_;
    std::vector<double> diag_;  // Q_mm / Q_{m-1,m-1}
};

}  // namespace chernstat
