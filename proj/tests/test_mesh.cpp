#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace seamkit;

namespace {

const char* kTriangleObj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";

IndexedMesh two_triangles(const std::vector<Vec2>& uv) {
    return IndexedMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)},
                       {Triangle{0, 1, 2}, Triangle{0, 2, 3}}, uv);
}

}  // namespace

TEST(ObjIo, MinimalTriangle) {
    const auto m = load_obj(kTriangleObj);
    EXPECT_EQ(m.vertex_count(), 3u);
    ASSERT_EQ(m.triangle_count(), 1u);
    EXPECT_FALSE(m.has_uv());
    EXPECT_EQ(m.triangles()[0], (Triangle{0, 1, 2}));
}

TEST(ObjIo, QuadIsFanTriangulated) {
    const auto m = load_obj(
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
        "f 1/1 2/2 3/3 4/4\n");
    ASSERT_EQ(m.triangle_count(), 2u);
    EXPECT_EQ(m.triangles()[0], (Triangle{0, 1, 2}));
    EXPECT_EQ(m.triangles()[1], (Triangle{0, 2, 3}));
    ASSERT_TRUE(m.has_uv());
    EXPECT_EQ(m.uv_corners()->size(), 6u);
    EXPECT_EQ((*m.uv_corners())[5], Vec2(0, 1));
}

TEST(ObjIo, AllReferenceForms) {
    const auto m = load_obj(
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 1\n"
        "f 1/1/1 2/2/1 3/3/1\nf -3//1 -1//1 -2//1\n");
    EXPECT_EQ(m.triangle_count(), 2u);
    EXPECT_FALSE(m.has_uv());  // second face has no vt
    EXPECT_EQ(m.triangles()[1], (Triangle{0, 2, 1}));
}

TEST(ObjIo, ParseErrorCarriesLine) {
    try {
        load_obj("v 0 0 0\nv 1 0 zero\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(load_obj("v 0 0 0\nv 1 0 0\nf 1 2\n"), ParseError);
}

TEST(ObjIo, IndexOutOfRange) {
    EXPECT_THROW(load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"), IndexError);
    EXPECT_THROW(load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/2 3/1\n"), IndexError);
}

TEST(ObjIo, RandomRoundTrip) {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        // Dyadic coordinates survive the 9-digit text form exactly.
        auto q = [&] { return std::round(rng.uniform(-64, 64) * 64.0) / 64.0; };
        const std::size_t nv = 3 + rng.index(20);
        std::vector<Vec3> v;
        for (std::size_t i = 0; i < nv; ++i) v.emplace_back(q(), q(), q());
        std::vector<Triangle> t;
        const std::size_t nf = 1 + rng.index(30);
        while (t.size() < nf) {
            Triangle tri{static_cast<VertexId>(rng.index(nv)), static_cast<VertexId>(rng.index(nv)),
                         static_cast<VertexId>(rng.index(nv))};
            if (tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2]) t.push_back(tri);
        }
        std::optional<std::vector<Vec2>> uv;
        if (trial % 2) {
            uv.emplace();
            for (std::size_t i = 0; i < 3 * nf; ++i) uv->emplace_back(std::round(rng.uniform() * 64) / 64, std::round(rng.uniform() * 64) / 64);
        }
        const IndexedMesh m(v, t, uv);
        const auto text = to_obj(m);
        const auto back = load_obj(text);
        EXPECT_EQ(back, m) << "trial " << trial;
        EXPECT_EQ(to_obj(back), text);
    }
}

TEST(Mesh, InvariantsEnforced) {
    EXPECT_THROW(IndexedMesh({Vec3::Zero(), Vec3::UnitX()}, {Triangle{0, 1, 2}}), IndexError);
    EXPECT_THROW(IndexedMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {Triangle{0, 1, 1}}),
                 DegenerateInputError);
    EXPECT_THROW(IndexedMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {Triangle{0, 1, 2}},
                             std::vector<Vec2>(2)),
                 ContractError);
}

TEST(Mesh, EdgesAreUnionOfTriangleBoundaries) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = fixtures::random_soup(rng, 80, 30);
        std::map<EdgeKey, std::set<FaceId>> brute;
        for (FaceId f = 0; f < m.triangle_count(); ++f) {
            const auto& t = m.triangles()[f];
            for (int i = 0; i < 3; ++i) brute[EdgeKey(t[i], t[(i + 1) % 3])].insert(f);
        }
        ASSERT_EQ(m.edges().size(), brute.size());
        std::size_t nonmanifold = 0;
        for (const auto& e : m.edges()) {
            const auto it = brute.find(e.key);
            ASSERT_NE(it, brute.end());
            EXPECT_EQ(std::set<FaceId>(e.faces.begin(), e.faces.end()), it->second);
            EXPECT_DOUBLE_EQ(e.length, (m.vertices()[e.key.a] - m.vertices()[e.key.b]).norm());
            nonmanifold += it->second.size() > 2;
        }
        EXPECT_EQ(m.non_manifold_edge_count(), nonmanifold);
    }
}

TEST(Normalize, CubeCorners) {
    const auto [m, xf] = normalize(synthetic::box(2, 2, 2, 1));
    EXPECT_DOUBLE_EQ(xf.scale, 0.5);
    for (const auto& p : m.vertices()) {
        for (int k = 0; k < 3; ++k) EXPECT_EQ(std::abs(p[k]), 0.5);
    }
}

TEST(Normalize, CanonicalIsIdentity) {
    const auto src = normalize(synthetic::l_extrusion(2)).first;
    const auto [m, xf] = normalize(src);
    EXPECT_EQ(xf.scale, 1.0);
    EXPECT_EQ(xf.center, Vec3::Zero());
}

TEST(Normalize, BoundingBoxContract) {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto src = fixtures::random_soup(rng, 20, 20);
        const auto scaled = transform_mesh(src, {Vec3(rng.uniform(-9, 9), 3, -2), rng.uniform(0.01, 100)});
        const auto [m, xf] = normalize(scaled);
        Vec3 lo = m.vertices()[0], hi = lo;
        for (const auto& p : m.vertices()) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        EXPECT_NEAR((hi - lo).maxCoeff(), 1.0, 1e-12);
        EXPECT_LE((lo + hi).norm(), 1e-12);
        for (std::size_t i = 0; i < m.vertex_count(); ++i) {
            const Vec3 back = xf.invert(m.vertices()[i]);
            const Vec3& orig = scaled.vertices()[i];
            EXPECT_LE((back - orig).norm(), 1e-12 * std::max(1.0, orig.norm()));
        }
        EXPECT_NEAR(normalize(m).second.scale, 1.0, 1e-12);
    }
}

TEST(Normalize, ZeroExtentThrows) {
    EXPECT_THROW(normalize(IndexedMesh({Vec3(1, 1, 1)}, {})), DegenerateInputError);
    EXPECT_THROW(normalize(IndexedMesh()), DegenerateInputError);
}

TEST(UvSeams, MatchingCornersGiveNoSeam) {
    const auto m = two_triangles({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 0), Vec2(1, 1), Vec2(0, 1)});
    EXPECT_TRUE(extract_uv_seams(m).empty());
}

TEST(UvSeams, DifferingCornerGivesSeam) {
    const auto m = two_triangles({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 0), Vec2(1, 2), Vec2(0, 1)});
    const auto s = extract_uv_seams(m);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_TRUE(s.contains(EdgeKey(0, 2)));
}

TEST(UvSeams, BelowToleranceIsNotSeam) {
    const auto m = two_triangles({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 0), Vec2(1, 1 + 5e-8), Vec2(0, 1)});
    EXPECT_TRUE(extract_uv_seams(m).empty());
}

TEST(UvSeams, MissingUvIsContractError) {
    EXPECT_THROW(extract_uv_seams(synthetic::tetrahedron()), ContractError);
}

TEST(UvSeams, TexturedCubeMatchesBruteForce) {
    const auto m = synthetic::textured_cube();
    const auto& uv = *m.uv_corners();
    const auto& t = m.triangles();
    std::set<EdgeKey> brute;
    for (FaceId f = 0; f < t.size(); ++f) {
        for (FaceId g = f + 1; g < t.size(); ++g) {
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    const EdgeKey ef(t[f][i], t[f][(i + 1) % 3]);
                    const EdgeKey eg(t[g][j], t[g][(j + 1) % 3]);
                    if (ef != eg) continue;
                    auto uv_at = [&](FaceId face, VertexId v) {
                        for (int k = 0; k < 3; ++k) {
                            if (t[face][k] == v) return uv[3 * face + k];
                        }
                        return Vec2(Vec2::Zero());
                    };
                    if ((uv_at(f, ef.a) - uv_at(g, ef.a)).norm() > 1e-7 ||
                        (uv_at(f, ef.b) - uv_at(g, ef.b)).norm() > 1e-7) {
                        brute.insert(ef);
                    }
                }
            }
        }
    }
    const auto keys = extract_uv_seams(m).keys();
    EXPECT_EQ(std::set<EdgeKey>(keys.begin(), keys.end()), brute);
    EXPECT_EQ(brute.size(), 12u);
}

TEST(UvSeams, FaceOrderDoesNotMatter) {
    const auto m = synthetic::textured_cube();
    std::vector<std::size_t> order(m.triangle_count());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(9);
    rng.shuffle(order);
    std::vector<Triangle> t;
    std::vector<Vec2> uv;
    for (auto f : order) {
        t.push_back(m.triangles()[f]);
        for (int k = 0; k < 3; ++k) uv.push_back((*m.uv_corners())[3 * f + k]);
    }
    const IndexedMesh shuffled(m.vertices(), t, uv);
    EXPECT_EQ(extract_uv_seams(shuffled).keys(), extract_uv_seams(m).keys());
}

TEST(EdgeGraph, Counts) {
    const auto tri = load_obj(kTriangleObj);
    const auto g = build_edge_graph(tri);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.arc_count(), 3u);
    const auto tet = build_edge_graph(synthetic::tetrahedron());
    EXPECT_EQ(tet.node_count(), 4u);
    EXPECT_EQ(tet.arc_count(), 6u);
}

TEST(EdgeGraph, MatchesBrutePairEnumeration) {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = fixtures::random_soup(rng, 60, 25);
        const auto g = build_edge_graph(m);
        std::size_t brute = 0;
        for (VertexId u = 0; u < m.vertex_count(); ++u) {
            for (VertexId v = u + 1; v < m.vertex_count(); ++v) {
                bool adjacent = false;
                for (const auto& t : m.triangles()) {
                    const int hits = (t[0] == u || t[1] == u || t[2] == u) + (t[0] == v || t[1] == v || t[2] == v);
                    adjacent = adjacent || hits == 2;
                }
                brute += adjacent;
            }
        }
        EXPECT_EQ(g.arc_count(), brute);
        for (VertexId u = 0; u < g.node_count(); ++u) {
            for (const auto& arc : g.adjacency[u]) {
                const auto& back = g.adjacency[arc.to];
                EXPECT_TRUE(std::any_of(back.begin(), back.end(), [&](const auto& a) {
                    return a.to == u && a.length == arc.length;
                }));
            }
        }
    }
}
