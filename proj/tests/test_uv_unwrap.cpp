#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace seamkit;

namespace {

// Singular values via the closed-form eigenvalues of J^T J, with J built in
// a frame anchored on the second edge instead of the first.
std::pair<double, double> svd_oracle(const std::array<Vec3, 3>& p, const std::array<Vec2, 3>& q) {
    const Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0];
    const Vec3 fx = e2.normalized();
    const Vec3 fy = (e1 - e1.dot(fx) * fx).normalized();
    Eigen::Matrix2d X, U;
    X << e1.dot(fx), e2.dot(fx), e1.dot(fy), e2.dot(fy);
    U.col(0) = q[1] - q[0];
    U.col(1) = q[2] - q[0];
    const Eigen::Matrix2d J = U * X.inverse();
    const Eigen::Matrix2d M = J.transpose() * J;
    const double mean = 0.5 * (M(0, 0) + M(1, 1));
    const double rad = std::sqrt(0.25 * (M(0, 0) - M(1, 1)) * (M(0, 0) - M(1, 1)) + M(0, 1) * M(0, 1));
    return {std::sqrt(mean + rad), std::sqrt(std::max(0.0, mean - rad))};
}

Eigen::Matrix3d random_rotation(Rng& rng) {
    const Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    return q.normalized().toRotationMatrix();
}

IndexedMesh two_triangles() {
    return IndexedMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)},
                       {Triangle{0, 1, 2}, Triangle{0, 2, 3}});
}

}  // namespace

TEST(Jacobian, IsometryAndStretch) {
    const std::array<Vec3, 3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const auto iso = triangle_jacobian(p, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
    ASSERT_TRUE(iso);
    EXPECT_NEAR(iso->s1, 1.0, 1e-15);
    EXPECT_NEAR(iso->s2, 1.0, 1e-15);
    const auto st = triangle_jacobian(p, {Vec2(0, 0), Vec2(2, 0), Vec2(0, 1)});
    ASSERT_TRUE(st);
    EXPECT_DOUBLE_EQ(st->s1, 2.0);
    EXPECT_DOUBLE_EQ(st->s2, 1.0);
}

TEST(Jacobian, ZeroAreaIsExcluded) {
    EXPECT_FALSE(triangle_jacobian({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)},
                                   {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}));
}

TEST(Jacobian, MatchesClosedFormSvd) {
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<Vec3, 3> p;
        std::array<Vec2, 3> q;
        for (auto& v : p) v = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        for (auto& v : q) v = Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const auto s = triangle_jacobian(p, q);
        ASSERT_TRUE(s);
        const auto [o1, o2] = svd_oracle(p, q);
        EXPECT_GE(s->s1, s->s2);
        EXPECT_NEAR(s->s1, o1, 1e-9 * (1 + o1));
        EXPECT_NEAR(s->s2, o2, 1e-7 * (1 + o1));
    }
}

TEST(Jacobian, RigidInvarianceAndScaling) {
    Rng rng(18);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<Vec3, 3> p;
        std::array<Vec2, 3> q;
        for (auto& v : p) v = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        for (auto& v : q) v = Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const auto base = *triangle_jacobian(p, q);
        const Eigen::Matrix3d R = random_rotation(rng);
        const Vec3 t(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        std::array<Vec3, 3> p2;
        for (int i = 0; i < 3; ++i) p2[i] = R * p[i] + t;
        const double ang = rng.uniform(0, 6.28);
        const Eigen::Matrix2d r2 = Eigen::Rotation2Dd(ang).toRotationMatrix();
        const double s = rng.uniform(0.1, 10);
        std::array<Vec2, 3> q2;
        for (int i = 0; i < 3; ++i) q2[i] = s * (r2 * q[i]) + Vec2(3, -1);
        const auto moved = *triangle_jacobian(p2, q2);
        EXPECT_NEAR(moved.s1, s * base.s1, 1e-9 * s * (1 + base.s1));
        EXPECT_NEAR(moved.s2, s * base.s2, 1e-8 * s * (1 + base.s1));
    }
}

TEST(Cut, ClosedMeshNoSeams) {
    const auto m = synthetic::icosphere(1);
    const auto cut = cut_mesh(m, {});
    EXPECT_EQ(cut.island_count, 1u);
    EXPECT_EQ(cut.vertices.size(), m.vertex_count());
    EXPECT_EQ(cut.triangles.size(), m.triangle_count());
}

TEST(Cut, SharedEdgeMarked) {
    const auto m = two_triangles();
    SeamEdgeSet s;
    s.insert(EdgeKey(0, 2));
    const auto cut = cut_mesh(m, s);
    EXPECT_EQ(cut.island_count, 2u);
    EXPECT_EQ(cut.vertices.size(), 6u);
    EXPECT_NE(cut.island[0], cut.island[1]);
}

TEST(Cut, RejectsForeignEdge) {
    SeamEdgeSet s;
    s.insert(EdgeKey(1, 3));
    EXPECT_THROW(cut_mesh(two_triangles(), s), ContractError);
}

TEST(Cut, RandomMeshesMatchUnionFindOracle) {
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = trial % 2 ? fixtures::random_soup(rng, 200, 40) : fixtures::random_height_grid(rng, 10);
        const auto seams = fixtures::random_edge_subset(rng, m, rng.uniform());
        const auto cut = cut_mesh(m, seams);
        EXPECT_EQ(cut.island_count, fixtures::island_oracle(m, seams));
        EXPECT_EQ(std::set<std::size_t>(cut.island.begin(), cut.island.end()).size(), cut.island_count);
        ASSERT_EQ(cut.triangles.size(), m.triangle_count());

        double before = 0.0, after = 0.0;
        for (FaceId f = 0; f < m.triangle_count(); ++f) {
            before += m.face_area(f);
            const auto& t = cut.triangles[f];
            after += triangle_area(cut.vertices[t[0]], cut.vertices[t[1]], cut.vertices[t[2]]);
            for (int k = 0; k < 3; ++k) EXPECT_EQ(cut.original_vertex[t[k]], m.triangles()[f][k]);
        }
        EXPECT_NEAR(after, before, 1e-12 * before);

        // Faces across a non-seam edge share both cut vertices; faces sharing a
        // cut-vertex pair shared the corresponding mesh edge.
        for (const auto& e : m.edges()) {
            if (seams.contains(e.key)) continue;
            for (std::size_t i = 1; i < e.faces.size(); ++i) {
                std::set<VertexId> a(cut.triangles[e.faces[0]].begin(), cut.triangles[e.faces[0]].end());
                int shared = 0;
                for (VertexId v : cut.triangles[e.faces[i]]) shared += a.count(v);
                EXPECT_GE(shared, 2);
            }
        }
        std::map<EdgeKey, std::vector<FaceId>> cut_edges;
        for (FaceId f = 0; f < cut.triangles.size(); ++f) {
            const auto& t = cut.triangles[f];
            for (int k = 0; k < 3; ++k) cut_edges[EdgeKey(t[k], t[(k + 1) % 3])].push_back(f);
        }
        for (const auto& [ce, faces] : cut_edges) {
            EXPECT_TRUE(m.has_edge(cut.original_vertex[ce.a], cut.original_vertex[ce.b]));
            for (std::size_t i = 1; i < faces.size(); ++i) EXPECT_EQ(cut.island[faces[0]], cut.island[faces[i]]);
        }
    }
}

TEST(Lscm, PlanarIslandIsSimilarity) {
    Rng rng(20);
    for (int trial = 0; trial < 10; ++trial) {
        // Jittered planar grid, then an arbitrary rigid placement in 3D.
        auto g = fixtures::random_height_grid(rng, 8);
        std::vector<Vec3> v = g.vertices();
        const Eigen::Matrix3d R = random_rotation(rng);
        for (auto& p : v) p = R * Vec3(p.x(), p.y(), 0.0);
        const IndexedMesh m(v, g.triangles());
        const auto atlas = unwrap(m, {});
        ASSERT_EQ(atlas.island_count(), 1u);
        EXPECT_FALSE(atlas.islands[0].non_disk);
        EXPECT_LE(distortion(atlas), 1e-9);
        // Pairwise distance ratios are constant under a similarity.
        const double k = (atlas.uv[1] - atlas.uv[0]).norm() / (v[1] - v[0]).norm();
        for (std::size_t i = 0; i < v.size(); ++i) {
            EXPECT_NEAR((atlas.uv[i] - atlas.uv[0]).norm(), k * (v[i] - v[0]).norm(), 1e-9);
        }
        EXPECT_LE(atlas.islands[0].relative_residual, kLscmResidualBound);
    }
}

TEST(Lscm, PinsExact) {
    const auto m = synthetic::l_extrusion(2);
    const auto atlas = unwrap(m, project_seams(m, synthetic::l_tree_seams()).seams);
    ASSERT_EQ(atlas.island_count(), 1u);
    for (const auto& d : atlas.islands) {
        EXPECT_EQ(atlas.uv[d.pin0], Vec2(0.0, 0.0));
        EXPECT_EQ(atlas.uv[d.pin1], Vec2(1.0, 0.0));
    }
}

TEST(Lscm, CylinderUnrollsIsometrically) {
    const auto m = synthetic::cylinder(16, 16);
    const auto seams = project_seams(m, synthetic::cylinder_generator()).seams;
    EXPECT_EQ(seams.size(), 16u);
    const auto atlas = unwrap(m, seams);
    ASSERT_EQ(atlas.island_count(), 1u);
    EXPECT_FALSE(atlas.islands[0].non_disk);
    EXPECT_LE(distortion(atlas), 1e-6);
    EXPECT_EQ(atlas.uv[atlas.islands[0].pin0], Vec2(0.0, 0.0));
    EXPECT_EQ(atlas.uv[atlas.islands[0].pin1], Vec2(1.0, 0.0));
}

TEST(Lscm, RingIslandIsFlagged) {
    const auto atlas = unwrap(synthetic::cylinder(12, 4), {});
    ASSERT_EQ(atlas.islands.size(), 1u);
    EXPECT_TRUE(atlas.islands[0].non_disk);
    for (const auto& p : atlas.uv) EXPECT_TRUE(p.allFinite());
}

TEST(Lscm, ZeroAreaIslandThrows) {
    const IndexedMesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)},
                        {Triangle{0, 1, 2}, Triangle{1, 3, 2}});
    EXPECT_THROW(unwrap(m, {}), DegenerateIslandError);
}

TEST(Lscm, DegenerateTriangleInsideIslandIsExcluded) {
    // A zero-area sliver glued onto a good triangle.
    const IndexedMesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(2, 0, 0)},
                        {Triangle{0, 1, 2}, Triangle{0, 3, 1}});
    const auto atlas = unwrap(m, {});
    EXPECT_EQ(atlas.excluded_triangles, 1u);
    EXPECT_FALSE(atlas.sigma[1]);
    EXPECT_LE(distortion(atlas), 1e-9);
    for (const auto& p : atlas.uv) EXPECT_TRUE(p.allFinite());
}
