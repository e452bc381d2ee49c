#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "seamkit/seamkit.hpp"

namespace seamkit::fixtures {

// Random triangle soup over up to max_vertices points. May be non-manifold and
// may have several components.
inline IndexedMesh random_soup(Rng& rng, std::size_t max_faces = 200, std::size_t max_vertices = 60) {
    const std::size_t nv = 4 + rng.index(max_vertices - 3);
    const std::size_t nf = 1 + rng.index(max_faces);
    std::vector<Vec3> v;
    for (std::size_t i = 0; i < nv; ++i) v.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::vector<Triangle> t;
    while (t.size() < nf) {
        const auto a = static_cast<VertexId>(rng.index(nv));
        const auto b = static_cast<VertexId>(rng.index(nv));
        const auto c = static_cast<VertexId>(rng.index(nv));
        if (a != b && b != c && a != c) t.push_back({a, b, c});
    }
    return IndexedMesh(std::move(v), std::move(t));
}

// Manifold height-field grid with jittered vertices: a well-conditioned disk.
inline IndexedMesh random_height_grid(Rng& rng, int max_cells = 8) {
    const int nx = 2 + static_cast<int>(rng.index(max_cells - 1));
    const int ny = 2 + static_cast<int>(rng.index(max_cells - 1));
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            v.emplace_back(i + rng.uniform(-0.2, 0.2), j + rng.uniform(-0.2, 0.2), rng.uniform(-0.7, 0.7));
        }
    }
    std::vector<Triangle> t;
    auto id = [&](int i, int j) { return static_cast<VertexId>(j * (nx + 1) + i); };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return IndexedMesh(std::move(v), std::move(t));
}

inline SeamEdgeSet random_edge_subset(Rng& rng, const IndexedMesh& mesh, double p) {
    SeamEdgeSet s;
    for (const auto& e : mesh.edges()) {
        if (rng.uniform() < p) s.insert(e.key);
    }
    return s;
}

// Island count by an independent face union-find over non-seam edges,
// computed straight from the triangle list.
inline std::size_t island_oracle(const IndexedMesh& mesh, const SeamEdgeSet& seams) {
    const auto& tris = mesh.triangles();
    std::vector<std::size_t> parent(tris.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    for (std::size_t f = 0; f < tris.size(); ++f) {
        for (std::size_t g = f + 1; g < tris.size(); ++g) {
            for (int i = 0; i < 3; ++i) {
                const VertexId a = tris[f][i], b = tris[f][(i + 1) % 3];
                const auto& u = tris[g];
                const bool shared = std::count(u.begin(), u.end(), a) && std::count(u.begin(), u.end(), b);
                if (shared && !seams.contains(EdgeKey(a, b))) parent[find(f)] = find(g);
            }
        }
    }
    std::size_t n = 0;
    for (std::size_t f = 0; f < tris.size(); ++f) n += find(f) == f;
    return n;
}

inline SeamSet random_seam_set(Rng& rng, std::size_t max_segments) {
    SeamSet s;
    const std::size_t n = rng.index(max_segments + 1);
    for (std::size_t i = 0; i < n; ++i) {
        s.push_back({Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                     Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))});
    }
    return s;
}

// A normalized synthetic shape with a seam set in canonical coordinates and
// the conditioning inputs sampled from it.
struct Shape {
    IndexedMesh mesh;
    SeamSet seams;
    ConditioningClouds clouds;
};

inline Shape make_shape(const IndexedMesh& raw, const SeamSet& raw_seams, std::uint64_t seed,
                        std::size_t cloud = 128) {
    auto [mesh, xf] = normalize(raw);
    Shape s{std::move(mesh), canonicalize(synthetic::to_canonical(raw_seams, xf)), {}};
    s.clouds = sample_conditioning(s.mesh, cloud, cloud, seed);
    return s;
}

inline Shape cube_shape(std::uint64_t seed = 1) {
    return make_shape(synthetic::cube(2), synthetic::box_cross_seams(1, 1, 1), seed);
}

inline Shape cylinder_shape(std::uint64_t seed = 2) {
    return make_shape(synthetic::cylinder(12, 4), synthetic::cylinder_generator(), seed);
}

inline Shape l_shape(std::uint64_t seed = 3) {
    return make_shape(synthetic::l_extrusion(1), synthetic::l_tree_seams(), seed);
}

}  // namespace seamkit::fixtures
