#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chernstat/field.hpp"
#include "chernstat/mesh.hpp"
#include "chernstat/spectral.hpp"

namespace chernstat {

struct RefinePolicy {
    int initial_depth = 3;
    double theta_max = std::numbers::pi / 2;
    double eta_min = 0.1;
    /// Near-degeneracies with gaps of order 1e-6 need depth ~21; the extra
    /// levels only touch a few triangles around such points. At most 32.
    int max_depth = 28;
    double residual_tol = 0.05;
    /// Also apply the phase and overlap tests to single-band links.
    bool check_bands = true;
    /// Refine edges where |E_n(p1) - E_n(p2)| > factor * sigma * |p1 - p2|;
    /// zero disables the test.
    double continuity_factor = 8.0;
    /// Refine triangles where some gap at a vertex is below
    /// factor * sigma * (longest edge); zero disables the test.
    double gap_factor = 1.0;

    void validate() const;
};

struct ChernResult {
    std::vector<int> band;         // N_1 .. N_M
    std::vector<int> gap;          // G_0 .. G_M, G_0 = G_M = 0
    std::vector<int> band_direct;  // N_n from single-band links
    double max_abs_phase = 0.0;
    double max_residual = 0.0;     // largest |sum F / 2 pi - round(...)|
    std::vector<double> min_overlap;  // per gap 1..M-1, over the final mesh
    std::size_t triangles = 0;
    std::size_t vertices = 0;
    int max_depth_used = 0;
    std::vector<std::size_t> depth_histogram;  // closure triangles per depth
    std::size_t refinement_rounds = 0;
    std::size_t eigensolves = 0;
    bool resolved = true;
    std::string note;
};

class ChernError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Link variable of the occupied subspace (lowest `n` bands) between two
/// points: det(S) / |det(S)| with S_ab = <psi_a(p1)|psi_b(p2)>.
struct GapLink {
    std::complex<double> phase;
    double magnitude;
};

GapLink gap_link(const SpectrumSample& from, const SpectrumSample& to, int n);

/// Everything the lattice computation produced for one realization.
struct ChernComputation {
    ChernResult result;
    TriMesh mesh;                          // final conforming mesh
    std::vector<Eigen::VectorXd> energies;  // spectrum at each mesh vertex
};

/// Hook applied to every vertex eigenbasis as it is computed; used by
/// tests to randomize eigenvector phases.
using GaugeHook = void (*)(int vertex, Eigen::MatrixXcd& vectors, void* context);

/// Gap and band Chern numbers of `field` by the lattice field-strength
/// method on an adaptively refined triangulation seeded with `initial`.
///
/// Throws ChernError when a converged gap sum is further than
/// policy.residual_tol from an integer, and EigenSolverError when a vertex
/// eigensolve fails. Realizations that hit max_depth with a threshold still
/// violated come back with resolved == false.
ChernComputation fhs_chern(const FieldRealization& field, const TriMesh& initial, const RefinePolicy& policy,
                           GaugeHook gauge = nullptr, void* gauge_context = nullptr);

/// Convenience: starts from build_icosphere(policy.initial_depth).
ChernComputation fhs_chern(const FieldRealization& field, const RefinePolicy& policy);

}  // namespace chernstat
