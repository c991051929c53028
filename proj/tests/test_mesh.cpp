#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "chernstat/mesh.hpp"

using namespace chernstat;

TEST_SUITE("mesh")
{
    TEST_CASE("icosphere counts, orientation and area")
    {
        for (int depth = 0; depth <= 4; ++depth) {
            const auto m = build_icosphere(depth);
            const std::size_t faces = 20u << (2 * depth);
            CHECK(m.triangles.size() == faces);
            CHECK(m.vertices.size() == faces / 2 + 2);
            CHECK(m.edge_count() == 3 * faces / 2);
            CHECK(m.euler_characteristic() == 2);
            CHECK(m.total_area() == doctest::Approx(4 * std::numbers::pi).epsilon(1e-12));
            CHECK(m.check().empty());
            double va = 0.0;
            for (double a : m.vertex_areas())
                va += a;
            CHECK(va == doctest::Approx(4 * std::numbers::pi).epsilon(1e-12));
            for (const auto& v : m.vertices)
                CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
        }
        CHECK_THROWS(build_icosphere(kIcosphereDepthCap + 1));
    }

    TEST_CASE("spherical area is signed and equals the octant for a right triangle")
    {
        const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0), z(0, 0, 1);
        CHECK(spherical_area(x, y, z) == doctest::Approx(std::numbers::pi / 2));
        CHECK(spherical_area(x, z, y) == doctest::Approx(-std::numbers::pi / 2));
    }

    TEST_CASE("rotation preserves validity")
    {
        const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
        const auto m = rotated(build_icosphere(2), r);
        CHECK(m.check().empty());
        CHECK(m.total_area() == doctest::Approx(4 * std::numbers::pi).epsilon(1e-12));
    }

    TEST_CASE("check() reports a broken orientation")
    {
        auto m = build_icosphere(1);
        std::swap(m.triangles[0][0], m.triangles[0][1]);
        CHECK_FALSE(m.check().empty());
    }

    TEST_CASE("adaptive refinement keeps a conforming closed triangulation")
    {
        AdaptiveMesh mesh(build_icosphere(1));
        auto closure = mesh.closure();
        CHECK(closure.mesh.triangles.size() == 80);
        CHECK(closure.mesh.check().empty());

        std::mt19937_64 rng(17);
        for (int round = 0; round < 6; ++round) {
            closure = mesh.closure();
            std::vector<int> marked;
            std::uniform_int_distribution<std::size_t> pick(0, closure.leaf.size() - 1);
            // Concentrate refinement near one region to force deep, graded meshes.
            for (std::size_t t = 0; t < closure.leaf.size(); ++t) {
                const auto& tri = closure.mesh.triangles[t];
                const Eigen::Vector3d c =
                    (closure.mesh.vertices[tri[0]] + closure.mesh.vertices[tri[1]] + closure.mesh.vertices[tri[2]]) / 3;
                if (c.normalized().dot(Eigen::Vector3d(0.2, 0.3, 0.93).normalized()) > 0.97)
                    marked.push_back(closure.leaf[t]);
            }
            for (int k = 0; k < 5; ++k)
                marked.push_back(closure.leaf[pick(rng)]);
            mesh.refine(marked, 9);
            closure = mesh.closure();
            INFO("round " << round);
            CHECK(closure.mesh.check().empty());
            CHECK(closure.mesh.euler_characteristic() == 2);
            CHECK(closure.mesh.total_area() == doctest::Approx(4 * std::numbers::pi).epsilon(1e-10));
        }
        int deepest = 0;
        for (std::size_t t = 0; t < closure.leaf.size(); ++t)
            deepest = std::max(deepest, mesh.leaf_depth(closure.leaf[t]));
        CHECK(deepest >= 6);
    }

    TEST_CASE("refine skips leaves at max depth")
    {
        AdaptiveMesh mesh(build_icosphere(0));
        const auto before = mesh.leaf_count();
        CHECK(mesh.refine({0, 1, 2}, 0) == 0);
        CHECK(mesh.leaf_count() == before);
        CHECK(mesh.refine({0}, 1) >= 1);
        CHECK(mesh.closure().mesh.check().empty());
    }
}
