#include "chernstat/chern.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace chernstat {

namespace {

using cplx = std::complex<double>;

// Below this pivot magnitude the unpivoted elimination hands over to
// partial-pivot LU for the remaining minors.
constexpr double kPivotFloor = 1e-6;

// Leading principal minors det(S[:n, :n]) for n = 1..count.
void leading_minors(const Eigen::MatrixXcd& s, int count, std::vector<cplx>& out)
{
    out.resize(static_cast<std::size_t>(count));
    if (count == 0)
        return;
    Eigen::MatrixXcd work = s.topLeftCorner(count, count);
    cplx det = 1.0;
    for (int j = 0; j < count; ++j) {
        const cplx pivot = work(j, j);
        det *= pivot;
        out[static_cast<std::size_t>(j)] = det;
        if (std::abs(pivot) < kPivotFloor) {
            for (int n = j + 2; n <= count; ++n)
                out[static_cast<std::size_t>(n - 1)] = s.topLeftCorner(n, n).partialPivLu().determinant();
            return;
        }
        const int rest = count - j - 1;
        for (int r = j + 1; r < count; ++r) {
            const cplx f = work(r, j) / pivot;
            work.row(r).segment(j + 1, rest) -= f * work.row(j).segment(j + 1, rest);
        }
    }
}

struct EdgeLinks {
    std::vector<cplx> gap;          // gaps 1..M-1, direction lo -> hi
    std::vector<double> gap_mag;
    std::vector<cplx> band;         // bands 1..M
    double min_gap_mag = 1.0;
    double min_band_mag = 1.0;
    bool discontinuous = false;
};

inline std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

inline std::uint64_t tri_key(const std::array<int, 3>& t)
{
    return (static_cast<std::uint64_t>(t[0]) << 42) | (static_cast<std::uint64_t>(t[1]) << 21) |
           static_cast<std::uint64_t>(t[2]);
}

inline cplx normalized_phase(cplx z, double mag) { return mag > 0.0 ? z / mag : cplx(1.0, 0.0); }

// |arg z| > theta, written without atan2.
inline bool exceeds(cplx z, double cos_theta) { return z.real() < std::abs(z) * cos_theta; }

class Lattice {
public:
    Lattice(const FieldRealization& field, const RefinePolicy& policy, GaugeHook gauge, void* context)
        : field_(field), policy_(policy), dim_(field.dim()), gauge_(gauge), context_(context),
          sigma_(std::sqrt(level_velocity_variance(field.spec()))), cos_theta_(std::cos(policy.theta_max))
    {
    }

    void ensure_vertices(const std::vector<Eigen::Vector3d>& vertices)
    {
        const std::size_t start = values_.size();
        if (start == vertices.size())
            return;
        const std::span<const Eigen::Vector3d> fresh(vertices.data() + start, vertices.size() - start);
        const auto matrices = field_.evaluate_many(fresh);
        for (std::size_t i = 0; i < matrices.size(); ++i) {
            auto sample = eigh(matrices[i], fresh[i]);
            if (gauge_)
                gauge_(static_cast<int>(start + i), sample.vectors, context_);
            values_.push_back(std::move(sample.values));
            vectors_.push_back(std::move(sample.vectors));
        }
        eig_count_ += matrices.size();
    }

    const EdgeLinks& links(int a, int b, const std::vector<Eigen::Vector3d>& vertices)
    {
        const auto key = edge_key(a, b);
        auto it = edges_.find(key);
        if (it != edges_.end())
            return it->second;

        const int lo = std::min(a, b);
        const int hi = std::max(a, b);
        const Eigen::MatrixXcd s = vectors_[lo].adjoint() * vectors_[hi];
        EdgeLinks e;
        std::vector<cplx> minors;
        leading_minors(s, dim_ - 1, minors);
        e.gap.resize(minors.size());
        e.gap_mag.resize(minors.size());
        for (std::size_t n = 0; n < minors.size(); ++n) {
            const double mag = std::abs(minors[n]);
            e.gap[n] = normalized_phase(minors[n], mag);
            e.gap_mag[n] = mag;
            e.min_gap_mag = std::min(e.min_gap_mag, mag);
        }
        e.band.resize(static_cast<std::size_t>(dim_));
        for (int n = 0; n < dim_; ++n) {
            const double mag = std::abs(s(n, n));
            e.band[static_cast<std::size_t>(n)] = normalized_phase(s(n, n), mag);
            e.min_band_mag = std::min(e.min_band_mag, mag);
        }
        if (policy_.continuity_factor > 0.0) {
            const double bound = policy_.continuity_factor * sigma_ * (vertices[lo] - vertices[hi]).norm();
            e.discontinuous = (values_[lo] - values_[hi]).cwiseAbs().maxCoeff() > bound;
        }
        return edges_.emplace(key, std::move(e)).first->second;
    }

    // Oriented link for a -> b.
    static cplx oriented(const std::vector<cplx>& stored, std::size_t n, bool forward)
    {
        return forward ? stored[n] : std::conj(stored[n]);
    }

    bool triangle_violates(const std::array<int, 3>& t, const std::vector<Eigen::Vector3d>& vertices)
    {
        const auto key = tri_key(t);
        if (auto it = triangle_cache_.find(key); it != triangle_cache_.end())
            return it->second;

        bool bad = false;
        const EdgeLinks* e[3];
        bool fwd[3];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k];
            const int b = t[(k + 1) % 3];
            e[k] = &links(a, b, vertices);
            fwd[k] = a < b;
            if (e[k]->min_gap_mag < policy_.eta_min || e[k]->discontinuous)
                bad = true;
            if (policy_.check_bands && e[k]->min_band_mag < policy_.eta_min)
                bad = true;
        }
        if (!bad && policy_.gap_factor > 0.0) {
            double h = 0.0;
            for (int k = 0; k < 3; ++k)
                h = std::max(h, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
            const double floor = policy_.gap_factor * sigma_ * h;
            for (int k = 0; k < 3 && !bad; ++k) {
                const auto& e = values_[t[k]];
                for (int n = 0; n + 1 < dim_ && !bad; ++n)
                    bad = e[n + 1] - e[n] < floor;
            }
        }
        for (std::size_t n = 0; n + 1 < static_cast<std::size_t>(dim_) && !bad; ++n) {
            const cplx w = oriented(e[0]->gap, n, fwd[0]) * oriented(e[1]->gap, n, fwd[1]) *
                           oriented(e[2]->gap, n, fwd[2]);
            bad = exceeds(w, cos_theta_);
        }
        for (std::size_t n = 0; policy_.check_bands && n < static_cast<std::size_t>(dim_) && !bad; ++n) {
            const cplx w = oriented(e[0]->band, n, fwd[0]) * oriented(e[1]->band, n, fwd[1]) *
                           oriented(e[2]->band, n, fwd[2]);
            bad = exceeds(w, cos_theta_);
        }
        triangle_cache_.emplace(key, bad);
        return bad;
    }

    void accumulate(const TriMesh& mesh, ChernResult& result)
    {
        const std::size_t gaps = static_cast<std::size_t>(dim_ - 1);
        const std::size_t bands = static_cast<std::size_t>(dim_);
        std::vector<double> gap_sum(gaps, 0.0);
        std::vector<double> band_sum(bands, 0.0);
        result.min_overlap.assign(gaps, 1.0);
        double max_phase = 0.0;
        for (const auto& t : mesh.triangles) {
            const EdgeLinks* e[3];
            bool fwd[3];
            for (int k = 0; k < 3; ++k) {
                const int a = t[k];
                const int b = t[(k + 1) % 3];
                e[k] = &links(a, b, mesh.vertices);
                fwd[k] = a < b;
                for (std::size_t n = 0; n < gaps; ++n)
                    result.min_overlap[n] = std::min(result.min_overlap[n], e[k]->gap_mag[n]);
            }
            for (std::size_t n = 0; n < gaps; ++n) {
                const double f = std::arg(oriented(e[0]->gap, n, fwd[0]) * oriented(e[1]->gap, n, fwd[1]) *
                                          oriented(e[2]->gap, n, fwd[2]));
                gap_sum[n] += f;
                max_phase = std::max(max_phase, std::abs(f));
            }
            for (std::size_t n = 0; n < bands; ++n)
                band_sum[n] += std::arg(oriented(e[0]->band, n, fwd[0]) * oriented(e[1]->band, n, fwd[1]) *
                                        oriented(e[2]->band, n, fwd[2]));
        }

        const double two_pi = 2.0 * std::numbers::pi;
        result.gap.assign(static_cast<std::size_t>(dim_ + 1), 0);
        double residual = 0.0;
        for (std::size_t n = 0; n < gaps; ++n) {
            const double x = gap_sum[n] / two_pi;
            const double r = std::round(x);
            residual = std::max(residual, std::abs(x - r));
            result.gap[n + 1] = static_cast<int>(r);
        }
        result.band.resize(bands);
        for (std::size_t n = 0; n < bands; ++n)
            result.band[n] = result.gap[n + 1] - result.gap[n];
        result.band_direct.resize(bands);
        for (std::size_t n = 0; n < bands; ++n) {
            const double x = band_sum[n] / two_pi;
            const double r = std::round(x);
            residual = std::max(residual, std::abs(x - r));
            result.band_direct[n] = static_cast<int>(r);
        }
        result.max_abs_phase = max_phase;
        result.max_residual = residual;
    }

    std::vector<Eigen::VectorXd> take_energies() { return std::move(values_); }
    std::size_t eig_count() const { return eig_count_; }

private:
    const FieldRealization& field_;
    const RefinePolicy& policy_;
    int dim_;
    GaugeHook gauge_;
    void* context_;
    double sigma_;
    double cos_theta_;
    std::vector<Eigen::VectorXd> values_;
    std::vector<Eigen::MatrixXcd> vectors_;
    std::unordered_map<std::uint64_t, EdgeLinks> edges_;
    std::unordered_map<std::uint64_t, bool> triangle_cache_;
    std::size_t eig_count_ = 0;
};

}  // namespace

void RefinePolicy::validate() const
{
    if (initial_depth < 0 || initial_depth > kIcosphereDepthCap)
        throw std::invalid_argument("initial_depth out of range");
    if (max_depth < initial_depth)
        throw std::invalid_argument("max_depth must be at least initial_depth");
    if (max_depth > 32)
        throw std::invalid_argument("max_depth above 32 is not supported");
    if (!(theta_max > 0.0 && theta_max < std::numbers::pi))
        throw std::invalid_argument("theta_max must lie in (0, pi)");
    if (!(eta_min >= 0.0 && eta_min < 1.0))
        throw std::invalid_argument("eta_min must lie in [0, 1)");
    if (!(residual_tol > 0.0 && residual_tol < 0.5))
        throw std::invalid_argument("residual_tol must lie in (0, 0.5)");
    if (gap_factor < 0.0)
        throw std::invalid_argument("gap_factor must be non-negative");
    if (continuity_factor < 0.0)
        throw std::invalid_argument("continuity_factor must be non-negative");
}

GapLink gap_link(const SpectrumSample& from, const SpectrumSample& to, int n)
{
    const int dim = static_cast<int>(from.values.size());
    if (n < 1 || n > dim)
        throw std::invalid_argument("gap_link: occupied band count out of range");
    const Eigen::MatrixXcd s = from.vectors.leftCols(n).adjoint() * to.vectors.leftCols(n);
    const cplx det = s.partialPivLu().determinant();
    const double mag = std::abs(det);
    return {normalized_phase(det, mag), mag};
}

ChernComputation fhs_chern(const FieldRealization& field, const TriMesh& initial, const RefinePolicy& policy,
                           GaugeHook gauge, void* gauge_context)
{
    policy.validate();
    AdaptiveMesh adaptive(initial);
    Lattice lattice(field, policy, gauge, gauge_context);

    ChernComputation out;
    ChernResult& result = out.result;
    AdaptiveMesh::Closure closure;
    std::size_t rounds = 0;
    while (true) {
        closure = adaptive.closure();
        if (closure.mesh.vertices.size() >= (std::size_t{1} << 21))
            throw ChernError("adaptive mesh exceeded the supported vertex count");
        lattice.ensure_vertices(closure.mesh.vertices);

        std::vector<int> marked;
        std::unordered_set<int> seen;
        bool stuck = false;
        for (std::size_t t = 0; t < closure.mesh.triangles.size(); ++t) {
            if (!lattice.triangle_violates(closure.mesh.triangles[t], closure.mesh.vertices))
                continue;
            const int leaf = closure.leaf[t];
            if (adaptive.leaf_depth(leaf) >= policy.max_depth) {
                stuck = true;
                continue;
            }
            if (seen.insert(leaf).second)
                marked.push_back(leaf);
        }
        if (marked.empty()) {
            result.resolved = !stuck;
            if (stuck)
                result.note = "refinement threshold still violated at max_depth";
            break;
        }
        adaptive.refine(marked, policy.max_depth);
        ++rounds;
    }

    lattice.accumulate(closure.mesh, result);
    result.triangles = closure.mesh.triangles.size();
    result.vertices = closure.mesh.vertices.size();
    result.refinement_rounds = rounds;
    for (int d : closure.mesh.depth) {
        result.max_depth_used = std::max(result.max_depth_used, d);
        if (static_cast<std::size_t>(d) >= result.depth_histogram.size())
            result.depth_histogram.resize(static_cast<std::size_t>(d) + 1, 0);
        ++result.depth_histogram[static_cast<std::size_t>(d)];
    }
    if (result.resolved && result.max_residual > policy.residual_tol)
        throw ChernError("gap Chern sum is " + std::to_string(result.max_residual) +
                         " away from an integer after convergence");

    out.mesh = std::move(closure.mesh);
    out.energies = lattice.take_energies();
    result.eigensolves = lattice.eig_count();
    return out;
}

ChernComputation fhs_chern(const FieldRealization& field, const RefinePolicy& policy)
{
    return fhs_chern(field, build_icosphere(policy.initial_depth), policy);
}

}  // namespace chernstat
