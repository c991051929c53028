#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "chernstat/chern.hpp"

using namespace chernstat;

namespace {

void check_sum_rules(const ChernResult& r, int dim)
{
    REQUIRE(r.band.size() == static_cast<std::size_t>(dim));
    REQUIRE(r.gap.size() == static_cast<std::size_t>(dim + 1));
    CHECK(r.gap.front() == 0);
    CHECK(r.gap.back() == 0);
    CHECK(std::accumulate(r.band.begin(), r.band.end(), 0) == 0);
    for (int n = 0; n < dim; ++n)
        CHECK(r.band[n] == r.gap[n + 1] - r.gap[n]);
}

/// Components of the traceless part of a 2x2 Hermitian matrix on the Pauli basis.
Eigen::Vector3d pauli_vector(const HermitianMatrix& h)
{
    return {h(0, 1).real(), -h(0, 1).imag(), 0.5 * (h(0, 0) - h(1, 1)).real()};
}

void random_phases(int vertex, Eigen::MatrixXcd& vectors, void* context)
{
    const auto seed = *static_cast<const std::uint64_t*>(context);
    std::mt19937_64 rng(seed * 1000003u + static_cast<std::uint64_t>(vertex));
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
    for (Eigen::Index c = 0; c < vectors.cols(); ++c)
        vectors.col(c) *= std::polar(1.0, phase(rng));
}

}  // namespace

TEST_SUITE("chern")
{
    TEST_CASE("gap link of identical subspaces is 1 and detects orthogonality")
    {
        std::mt19937_64 rng(4);
        const auto s = eigh(draw_gue(rng, 4));
        const auto self = gap_link(s, s, 2);
        CHECK(std::abs(self.phase - 1.0) < 1e-12);
        CHECK(self.magnitude == doctest::Approx(1.0));

        SpectrumSample swapped = s;
        swapped.vectors.col(0).swap(swapped.vectors.col(3));  // occupied pair now misses a vector
        CHECK(gap_link(s, swapped, 1).magnitude < 1e-12);
    }

    TEST_CASE("sum rules hold on every family")
    {
        for (const auto& spec : {CorrelationSpec::gaussian(1.0), CorrelationSpec::lorentzian(1.2),
                                 CorrelationSpec::four_matrix(1.0)}) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const auto f = sample_field(spec, 4, seed);
                const auto c = fhs_chern(f, RefinePolicy{});
                CHECK(c.result.resolved);
                check_sum_rules(c.result, 4);
                CHECK(c.result.band == c.result.band_direct);
                CHECK(c.result.max_residual < 1e-8);
                CHECK(c.mesh.check().empty());
                CHECK(c.energies.size() == c.mesh.vertices.size());
            }
        }
    }

    TEST_CASE("two-level four-matrix model: N_1 = -sign det of the Pauli map")
    {
        // With alpha = pi/2, H(r) = t(r) + (V r) . sigma, and the lower band's
        // Chern number is minus the degree of r -> V r / |V r|.
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto f = sample_field(CorrelationSpec::four_matrix(std::numbers::pi / 2), 2, seed);
            Eigen::Matrix3d v;
            for (int i = 0; i < 3; ++i)
                v.col(i) = pauli_vector(f.four_matrices()[i + 1]);
            const auto c = fhs_chern(f, RefinePolicy{});
            REQUIRE(c.result.resolved);
            CHECK(c.result.band[0] == (v.determinant() > 0 ? -1 : 1));
            CHECK(c.result.band[1] == -c.result.band[0]);
        }
    }

    TEST_CASE("Chern numbers are gauge invariant")
    {
        const auto f = sample_field(CorrelationSpec::gaussian(0.8), 5, 99);
        const auto plain = fhs_chern(f, RefinePolicy{});
        std::uint64_t seed = 7;
        const auto gauged = fhs_chern(f, build_icosphere(3), RefinePolicy{}, random_phases, &seed);
        CHECK(plain.result.band == gauged.result.band);
        CHECK(plain.result.gap == gauged.result.gap);
        CHECK(plain.result.band_direct == gauged.result.band_direct);
    }

    TEST_CASE("results do not depend on the initial mesh")
    {
        const Eigen::Matrix3d rot =
            Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.3, -0.5, 0.8).normalized()).toRotationMatrix();
        for (const auto& spec : {CorrelationSpec::gaussian(0.6), CorrelationSpec::four_matrix(1.2)}) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                const auto f = sample_field(spec, 6, 500 + seed);
                RefinePolicy p;
                const auto base = fhs_chern(f, p);
                RefinePolicy deeper = p;
                deeper.initial_depth = p.initial_depth + 1;
                const auto fine = fhs_chern(f, deeper);
                const auto turned = fhs_chern(f, rotated(build_icosphere(p.initial_depth), rot), p);
                REQUIRE(base.result.resolved);
                CHECK(base.result.band == fine.result.band);
                CHECK(base.result.band == turned.result.band);
            }
        }
    }

    TEST_CASE("depth cap leaves hard cases unresolved instead of guessing")
    {
        const auto f = sample_field(CorrelationSpec::gaussian(0.3), 8, 1);
        RefinePolicy p;
        p.initial_depth = 1;
        p.max_depth = 1;
        const auto c = fhs_chern(f, p);
        CHECK_FALSE(c.result.resolved);
        CHECK_FALSE(c.result.note.empty());
    }

    TEST_CASE("diagnostics are populated")
    {
        const auto f = sample_field(CorrelationSpec::lorentzian(0.9), 3, 5);
        const auto c = fhs_chern(f, RefinePolicy{});
        CHECK(c.result.vertices == c.mesh.vertices.size());
        CHECK(c.result.triangles == c.mesh.triangles.size());
        CHECK(c.result.eigensolves >= c.result.vertices);
        CHECK(c.result.max_depth_used >= RefinePolicy{}.initial_depth);
        CHECK(c.result.min_overlap.size() == 2);
        CHECK(c.result.max_abs_phase <= RefinePolicy{}.theta_max + 1e-12);
        std::size_t total = 0;
        for (auto n : c.result.depth_histogram)
            total += n;
        CHECK(total == c.result.triangles);
    }

    TEST_CASE("policy validation")
    {
        RefinePolicy p;
        p.max_depth = p.initial_depth - 1;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = {};
        p.theta_max = 4.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = {};
        p.residual_tol = 0.6;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = {};
        p.gap_factor = -1.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        CHECK_NOTHROW(RefinePolicy{}.validate());
    }
}
