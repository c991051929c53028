#include "chernstat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace chernstat {

double spherical_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c)
{
    const double triple = a.dot(b.cross(c));
    const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(triple, denom);
}

std::size_t TriMesh::edge_count() const
{
    std::unordered_map<std::uint64_t, int> seen;
    seen.reserve(triangles.size() * 2);
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            const auto a = static_cast<std::uint64_t>(std::min(t[k], t[(k + 1) % 3]));
            const auto b = static_cast<std::uint64_t>(std::max(t[k], t[(k + 1) % 3]));
            seen[(a << 32) | b] = 1;
        }
    }
    return seen.size();
}

int TriMesh::euler_characteristic() const
{
    return static_cast<int>(vertices.size()) - static_cast<int>(edge_count()) + static_cast<int>(triangles.size());
}

double TriMesh::total_area() const
{
    double sum = 0.0;
    for (const auto& t : triangles)
        sum += spherical_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    return sum;
}

std::vector<double> TriMesh::vertex_areas() const
{
    std::vector<double> areas(vertices.size(), 0.0);
    for (const auto& t : triangles) {
        const double third = spherical_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) / 3.0;
        for (int v : t)
            areas[v] += third;
    }
    return areas;
}

std::string TriMesh::check() const
{
    std::ostringstream why;
    if (euler_characteristic() != 2)
        why << "Euler characteristic " << euler_characteristic() << " != 2; ";

    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(triangles.size() * 3);
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            const auto a = static_cast<std::uint64_t>(t[k]);
            const auto b = static_cast<std::uint64_t>(t[(k + 1) % 3]);
            if (++directed[(a << 32) | b] > 1) {
                why << "directed edge " << a << "->" << b << " used twice; ";
                return why.str();
            }
        }
    }
    for (const auto& [k, count] : directed) {
        const std::uint64_t rev = (k << 32) | (k >> 32);
        if (!directed.contains(rev)) {
            why << "edge " << (k >> 32) << "->" << (k & 0xffffffffu) << " has no reverse; ";
            break;
        }
    }
    for (const auto& t : triangles) {
        if (spherical_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0) {
            why << "triangle with non-positive oriented area; ";
            break;
        }
    }
    const double area = total_area();
    if (std::abs(area - 4.0 * std::numbers::pi) > 1e-9)
        why << "total area " << area << " != 4 pi; ";
    return why.str();
}

namespace {

TriMesh icosahedron()
{
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh mesh;
    const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (const auto& r : raw)
        mesh.vertices.push_back(Eigen::Vector3d(r[0], r[1], r[2]).normalized());

    // Faces are the vertex triples at mutual nearest-neighbour distance.
    const double edge = (mesh.vertices[0] - mesh.vertices[1]).norm();
    auto adjacent = [&](int i, int j) {
        return std::abs((mesh.vertices[i] - mesh.vertices[j]).norm() - edge) < 1e-9;
    };
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j)
            for (int k = j + 1; k < 12; ++k)
                if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k)) {
                    if (spherical_area(mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]) > 0.0)
                        mesh.triangles.push_back({i, j, k});
                    else
                        mesh.triangles.push_back({i, k, j});
                    mesh.depth.push_back(0);
                }
    return mesh;
}

}  // namespace

TriMesh build_icosphere(int depth)
{
    if (depth < 0 || depth > kIcosphereDepthCap)
        throw std::invalid_argument("build_icosphere: depth must lie in [0, " +
                                    std::to_string(kIcosphereDepthCap) + "]");
    TriMesh mesh = icosahedron();
    for (int level = 0; level < depth; ++level) {
        std::unordered_map<std::uint64_t, int> mid;
        mid.reserve(mesh.triangles.size() * 2);
        auto midpoint = [&](int a, int b) {
            const auto lo = static_cast<std::uint64_t>(std::min(a, b));
            const auto hi = static_cast<std::uint64_t>(std::max(a, b));
            auto [it, inserted] = mid.try_emplace((lo << 32) | hi, 0);
            if (inserted) {
                it->second = static_cast<int>(mesh.vertices.size());
                mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
            }
            return it->second;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(mesh.triangles.size() * 4);
        for (const auto& [a, b, c] : mesh.triangles) {
            const int ab = midpoint(a, b);
            const int bc = midpoint(b, c);
            const int ca = midpoint(c, a);
            next.push_back({a, ab, ca});
            next.push_back({ab, b, bc});
            next.push_back({ca, bc, c});
            next.push_back({ab, bc, ca});
        }
        mesh.triangles = std::move(next);
    }
    mesh.depth.assign(mesh.triangles.size(), depth);
    return mesh;
}

TriMesh rotated(const TriMesh& mesh, const Eigen::Matrix3d& rotation)
{
    TriMesh out = mesh;
    for (auto& v : out.vertices)
        v = (rotation * v).normalized();
    return out;
}

AdaptiveMesh::AdaptiveMesh(const TriMesh& initial) : vertices_(initial.vertices)
{
    leaves_.reserve(initial.triangles.size() * 2);
    for (std::size_t t = 0; t < initial.triangles.size(); ++t)
        leaves_.push_back({initial.triangles[t], initial.depth.empty() ? 0 : initial.depth[t], true});
}

std::uint64_t AdaptiveMesh::key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

int AdaptiveMesh::find_midpoint(int a, int b) const
{
    auto it = midpoints_.find(key(a, b));
    return it == midpoints_.end() ? -1 : it->second;
}

int AdaptiveMesh::midpoint(int a, int b)
{
    auto [it, inserted] = midpoints_.try_emplace(key(a, b), 0);
    if (inserted) {
        it->second = static_cast<int>(vertices_.size());
        vertices_.push_back((vertices_[a] + vertices_[b]).normalized());
    }
    return it->second;
}

bool AdaptiveMesh::needs_split(const Node& node) const
{
    int hanging = 0;
    for (int k = 0; k < 3; ++k) {
        const int a = node.v[k];
        const int b = node.v[(k + 1) % 3];
        const int m = find_midpoint(a, b);
        if (m < 0)
            continue;
        if (find_midpoint(a, m) >= 0 || find_midpoint(m, b) >= 0)
            return true;
        ++hanging;
    }
    return hanging >= 2;
}

void AdaptiveMesh::split(int leaf)
{
    const Node node = leaves_[static_cast<std::size_t>(leaf)];
    leaves_[static_cast<std::size_t>(leaf)].alive = false;
    const auto [a, b, c] = node.v;
    const int ab = midpoint(a, b);
    const int bc = midpoint(b, c);
    const int ca = midpoint(c, a);
    const int d = node.depth + 1;
    leaves_.push_back({{a, ab, ca}, d, true});
    leaves_.push_back({{ab, b, bc}, d, true});
    leaves_.push_back({{ca, bc, c}, d, true});
    leaves_.push_back({{ab, bc, ca}, d, true});
}

std::size_t AdaptiveMesh::refine(const std::vector<int>& leaves, int max_depth)
{
    std::size_t count = 0;
    for (int leaf : leaves) {
        const Node& node = leaves_[static_cast<std::size_t>(leaf)];
        if (node.alive && node.depth < max_depth) {
            split(leaf);
            ++count;
        }
    }
    bool changed = count > 0;
    while (changed) {
        changed = false;
        const std::size_t n = leaves_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (leaves_[i].alive && needs_split(leaves_[i])) {
                split(static_cast<int>(i));
                ++count;
                changed = true;
            }
        }
    }
    return count;
}

std::size_t AdaptiveMesh::leaf_count() const
{
    return static_cast<std::size_t>(std::count_if(leaves_.begin(), leaves_.end(), [](const Node& n) { return n.alive; }));
}

AdaptiveMesh::Closure AdaptiveMesh::closure() const
{
    Closure out;
    out.mesh.vertices = vertices_;
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        const Node& node = leaves_[i];
        if (!node.alive)
            continue;
        int hanging_side = -1;
        int m = -1;
        for (int k = 0; k < 3; ++k) {
            const int mid = find_midpoint(node.v[k], node.v[(k + 1) % 3]);
            if (mid >= 0) {
                hanging_side = k;
                m = mid;
                break;
            }
        }
        const int leaf = static_cast<int>(i);
        if (hanging_side < 0) {
            out.mesh.triangles.push_back(node.v);
            out.mesh.depth.push_back(node.depth);
            out.leaf.push_back(leaf);
            continue;
        }
        const int a = node.v[hanging_side];
        const int b = node.v[(hanging_side + 1) % 3];
        const int c = node.v[(hanging_side + 2) % 3];
        out.mesh.triangles.push_back({a, m, c});
        out.mesh.triangles.push_back({m, b, c});
        out.mesh.depth.push_back(node.depth);
        out.mesh.depth.push_back(node.depth);
        out.leaf.push_back(leaf);
        out.leaf.push_back(leaf);
    }
    return out;
}

}  // namespace chernstat
