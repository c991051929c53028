#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "chernstat/field.hpp"

namespace chernstat {

struct TriMesh;

/// Eigen-decomposition of H at one point. Column n of `vectors` is band n;
/// eigenvalues ascend.
struct SpectrumSample {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

class EigenSolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SpectrumSample eigh(const HermitianMatrix& h, const Eigen::Vector3d& point = Eigen::Vector3d::Zero());

/// GUE mean density of states, sqrt(4M - E^2) / (2 pi), for |E| < 2 sqrt(M).
double semicircle_dos(int dim, double energy);

/// Per-realization band energies and band-local densities of states.
struct BandDiagnostics {
    int dim = 0;
    std::vector<double> mean_energy;  // area-weighted <E_n>
    std::vector<double> density;      // rho_n
    std::vector<double> min_gap;      // min over vertices of E_{n+1} - E_n, n = 1..M-1
};

/// Uses the vertex areas of `mesh` (one third of the incident triangle
/// areas) as weights; `energies[v]` are the sorted eigenvalues at vertex v.
BandDiagnostics band_diagnostics(const TriMesh& mesh, const std::vector<Eigen::VectorXd>& energies);

}  // namespace chernstat
