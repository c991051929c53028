#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chernstat/correlation.hpp"
#include "chernstat/sph_harm.hpp"

namespace chernstat {

using HermitianMatrix = Eigen::MatrixXcd;

/// One sampled GUE-valued random field on the unit sphere.
///
/// Gaussian and Lorentzian fields are stored as spherical-harmonic
/// coefficient tables (a truncated Karhunen-Loeve expansion) and can be
/// evaluated exactly at any point. Four-matrix fields keep the four GUE
/// draws. Instances are immutable and safe to share between threads.
class FieldRealization {
public:
    int dim() const { return dim_; }
    const CorrelationSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    int l_max() const { return basis_ ? basis_->l_max() : 0; }

    /// H(p) for a point p on the unit sphere (normalized on entry).
    HermitianMatrix evaluate(const Eigen::Vector3d& p) const;

    /// Batched evaluation; results are identical to repeated evaluate().
    std::vector<HermitianMatrix> evaluate_many(std::span<const Eigen::Vector3d> points) const;

    /// Four-matrix draws (H0, Hx, Hy, Hz); empty for other families.
    const std::vector<HermitianMatrix>& four_matrices() const { return four_; }

private:
    friend FieldRealization sample_field(const CorrelationSpec&, int, std::uint64_t);

    int dim_ = 0;
    CorrelationSpec spec_;
    std::uint64_t seed_ = 0;
    std::shared_ptr<const RealSphHarmBasis> basis_;
    // Rows: M diagonal fields, then (re, im) for each i < j pair.
    Eigen::MatrixXd coefficients_;
    std::vector<HermitianMatrix> four_;

    HermitianMatrix assemble(const Eigen::Ref<const Eigen::VectorXd>& values) const;
};

/// Draws a realization. Same (spec, dim, seed) always gives the same field.
FieldRealization sample_field(const CorrelationSpec& spec, int dim, std::uint64_t seed);

/// A single GUE matrix: diagonal N(0, 1), off-diagonal real and imaginary
/// parts N(0, 1/2), so every element has unit magnitude variance.
template <typename Rng>
HermitianMatrix draw_gue(Rng& rng, int dim);

}  // namespace chernstat

#include "chernstat/detail/gue.ipp"
