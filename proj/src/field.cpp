#include "chernstat/field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

namespace chernstat {

namespace {

// Points are synthesized in fixed-size blocks so that a point's value never
// depends on how many other points share its batch.
constexpr Eigen::Index kBlock = 32;

struct SpectrumCacheEntry {
    AngularSpectrum spectrum;
    std::shared_ptr<const RealSphHarmBasis> basis;
};

const SpectrumCacheEntry& cached_spectrum(const CorrelationSpec& spec)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, double, double, int>, SpectrumCacheEntry> cache;
    const auto key = std::make_tuple(static_cast<int>(spec.family), spec.scale, spec.spectrum_tol, spec.l_max_cap);
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        SpectrumCacheEntry entry;
        entry.spectrum = legendre_spectrum(spec, spec.spectrum_tol);
        entry.basis = std::make_shared<RealSphHarmBasis>(entry.spectrum.l_max);
        it = cache.emplace(key, std::move(entry)).first;
    }
    return it->second;
}

}  // namespace

FieldRealization sample_field(const CorrelationSpec& spec, int dim, std::uint64_t seed)
{
    spec.validate();
    if (dim < 2)
        throw std::invalid_argument("sample_field: matrix dimension must be at least 2");

    FieldRealization field;
    field.dim_ = dim;
    field.spec_ = spec;
    field.seed_ = seed;

    std::mt19937_64 rng(seed);
    if (spec.family == Family::four_matrix) {
        field.four_.reserve(4);
        for (int k = 0; k < 4; ++k)
            field.four_.push_back(draw_gue(rng, dim));
        return field;
    }

    const auto& entry = cached_spectrum(spec);
    field.basis_ = entry.basis;
    const int l_max = entry.spectrum.l_max;
    const int modes = entry.basis->size();
    const int fields = dim * dim;

    std::vector<double> mode_scale(modes);
    for (int l = 0; l <= l_max; ++l) {
        const double var = 4.0 * std::numbers::pi * entry.spectrum.coefficients[l] / (2.0 * l + 1.0);
        for (int m = -l; m <= l; ++m)
            mode_scale[RealSphHarmBasis::index(l, m)] = std::sqrt(var);
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    const double half = std::sqrt(0.5);
    field.coefficients_.resize(fields, modes);
    for (int f = 0; f < fields; ++f) {
        const double element_scale = f < dim ? 1.0 : half;
        for (int k = 0; k < modes; ++k)
            field.coefficients_(f, k) = element_scale * mode_scale[k] * normal(rng);
    }
    return field;
}

HermitianMatrix FieldRealization::assemble(const Eigen::Ref<const Eigen::VectorXd>& values) const
{
    HermitianMatrix h(dim_, dim_);
    int f = dim_;
    for (int i = 0; i < dim_; ++i) {
        h(i, i) = values[i];
        for (int j = i + 1; j < dim_; ++j) {
            const double re = values[f];
            const double im = values[f + 1];
            f += 2;
            h(i, j) = {re, im};
            h(j, i) = {re, -im};
        }
    }
    return h;
}

HermitianMatrix FieldRealization::evaluate(const Eigen::Vector3d& p) const
{
    return evaluate_many(std::span<const Eigen::Vector3d>(&p, 1)).front();
}

std::vector<HermitianMatrix> FieldRealization::evaluate_many(std::span<const Eigen::Vector3d> points) const
{
    std::vector<HermitianMatrix> out;
    out.reserve(points.size());

    if (spec_.family == Family::four_matrix) {
        const double c = std::cos(spec_.scale);
        const double s = std::sin(spec_.scale);
        for (const auto& raw : points) {
            const Eigen::Vector3d p = raw.normalized();
            HermitianMatrix h = c * four_[0] + s * (p.x() * four_[1] + p.y() * four_[2] + p.z() * four_[3]);
            // Linear combinations of Hermitian matrices stay Hermitian up to
            // rounding; mirror the upper triangle so it holds exactly.
            for (int i = 0; i < dim_; ++i) {
                h(i, i) = h(i, i).real();
                for (int j = i + 1; j < dim_; ++j)
                    h(j, i) = std::conj(h(i, j));
            }
            out.push_back(std::move(h));
        }
        return out;
    }

    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd basis_values = Eigen::MatrixXd::Zero(basis_->size(), kBlock);
    Eigen::MatrixXd values(coefficients_.rows(), kBlock);
    for (Eigen::Index start = 0; start < n; start += kBlock) {
        const Eigen::Index count = std::min(kBlock, n - start);
        for (Eigen::Index j = 0; j < count; ++j) {
            const Eigen::Vector3d p = points[static_cast<std::size_t>(start + j)].normalized();
            basis_->evaluate(p, std::span<double>(basis_values.col(j).data(),
                                                  static_cast<std::size_t>(basis_->size())));
        }
        for (Eigen::Index j = count; j < kBlock; ++j)
            basis_values.col(j).setZero();
        values.noalias() = coefficients_ * basis_values;
        for (Eigen::Index j = 0; j < count; ++j)
            out.push_back(assemble(values.col(j)));
    }
    return out;
}

}  // namespace chernstat
