#include "chernstat/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "chernstat/mesh.hpp"

namespace chernstat {

SpectrumSample eigh(const HermitianMatrix& h, const Eigen::Vector3d& point)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw EigenSolverError("Hermitian eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors(), point};
}

double semicircle_dos(int dim, double energy)
{
    const double edge2 = 4.0 * dim;
    if (!(energy * energy < edge2))
        throw std::domain_error("semicircle_dos: energy at or beyond the semicircle edge");
    return std::sqrt(edge2 - energy * energy) / (2.0 * std::numbers::pi);
}

BandDiagnostics band_diagnostics(const TriMesh& mesh, const std::vector<Eigen::VectorXd>& energies)
{
    if (energies.size() != mesh.vertices.size() || energies.empty())
        throw std::invalid_argument("band_diagnostics: need one spectrum per mesh vertex");
    const int dim = static_cast<int>(energies.front().size());
    const auto areas = mesh.vertex_areas();

    BandDiagnostics out;
    out.dim = dim;
    out.mean_energy.assign(dim, 0.0);
    out.min_gap.assign(dim > 0 ? dim - 1 : 0, std::numeric_limits<double>::infinity());
    std::vector<double> spread(dim, 0.0);

    double total = 0.0;
    for (std::size_t v = 0; v < energies.size(); ++v) {
        const auto& e = energies[v];
        const double w = areas[v];
        total += w;
        for (int n = 0; n < dim; ++n) {
            out.mean_energy[n] += w * e[n];
            const int lo = std::max(n - 1, 0);
            const int hi = std::min(n + 1, dim - 1);
            spread[n] += w * (e[hi] - e[lo]) / (hi - lo);
        }
        for (int n = 0; n + 1 < dim; ++n)
            out.min_gap[n] = std::min(out.min_gap[n], e[n + 1] - e[n]);
    }
    out.density.resize(dim);
    for (int n = 0; n < dim; ++n) {
        out.mean_energy[n] /= total;
        out.density[n] = total / spread[n];
    }
    return out;
}

}  // namespace chernstat
