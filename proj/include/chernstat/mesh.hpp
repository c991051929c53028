#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace chernstat {

/// Oriented triangulation of the unit sphere. Triangles are listed
/// counter-clockwise seen from outside.
struct TriMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> depth;  // refinement depth of each triangle

    std::size_t edge_count() const;
    int euler_characteristic() const;
    double total_area() const;
    std::vector<double> vertex_areas() const;

    /// Checks Euler characteristic, closed consistent orientation (every
    /// directed edge used once, its reverse once) and the 4 pi area sum.
    /// Returns an empty string when valid, else a description.
    std::string check() const;
};

/// Signed area of the spherical triangle (a, b, c); positive when the
/// triangle is counter-clockwise seen from outside.
double spherical_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c);

constexpr int kIcosphereDepthCap = 9;

/// Icosahedron subdivided `depth` times with vertices pushed to the sphere.
TriMesh build_icosphere(int depth);

/// Applies a rotation to every vertex.
TriMesh rotated(const TriMesh& mesh, const Eigen::Matrix3d& rotation);

/// Hierarchical red refinement with derived green closure.
///
/// Leaves of the refinement forest carry the truth; the conforming
/// triangulation is derived from them on demand. Neighbouring leaves differ
/// by at most one level and a leaf has at most one hanging midpoint, which
/// the closure removes by bisecting toward the opposite corner. Every edge
/// of the closure is therefore shared by exactly two triangles.
class AdaptiveMesh {
public:
    explicit AdaptiveMesh(const TriMesh& initial);

    struct Closure {
        TriMesh mesh;
        std::vector<int> leaf;  // owning leaf of each closure triangle
    };

    Closure closure() const;

    /// Red-splits the given leaves (those at max_depth are skipped) and
    /// restores the balance conditions. Returns how many leaves were split.
    std::size_t refine(const std::vector<int>& leaves, int max_depth);

    const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
    std::size_t leaf_count() const;
    int leaf_depth(int leaf) const { return leaves_[static_cast<std::size_t>(leaf)].depth; }

private:
    struct Node {
        std::array<int, 3> v;
        int depth;
        bool alive;
    };

    static std::uint64_t key(int a, int b);
    int find_midpoint(int a, int b) const;
    int midpoint(int a, int b);
    bool needs_split(const Node& node) const;
    void split(int leaf);

    std::vector<Eigen::Vector3d> vertices_;
    std::vector<Node> leaves_;
    std::unordered_map<std::uint64_t, int> midpoints_;
};

}  // namespace chernstat
