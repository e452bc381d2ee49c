#pragma once

// Procedural test shapes with known seam layouts: planar grids, boxes,
// open cylinders, L-shaped extrusions and icospheres.

#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "mesh.hpp"
#include "seam_token.hpp"

namespace seamkit::synthetic {

namespace detail {

// Welds vertices by position rounded to a 1e-9 lattice.
class MeshBuilder {
public:
    VertexId vertex(const Vec3& p) {
        const auto key = std::make_tuple(std::llround(p.x() * 1e9), std::llround(p.y() * 1e9), std::llround(p.z() * 1e9));
        auto [it, inserted] = index_.try_emplace(key, static_cast<VertexId>(vertices_.size()));
        if (inserted) vertices_.push_back(p);
        return it->second;
    }

    void triangle(VertexId a, VertexId b, VertexId c) { triangles_.push_back({a, b, c}); }

    // Grid of nu x nv quads spanning origin + [0,1]du + [0,1]dv, each split
    // along its (0,0)-(1,1) diagonal. Normal follows du x dv.
    void quad_grid(const Vec3& origin, const Vec3& du, const Vec3& dv, int nu, int nv) {
        for (int j = 0; j < nv; ++j) {
            for (int i = 0; i < nu; ++i) {
                auto at = [&](int a, int b) {
                    return vertex(origin + du * (static_cast<double>(a) / nu) + dv * (static_cast<double>(b) / nv));
                };
                const auto v00 = at(i, j), v10 = at(i + 1, j), v11 = at(i + 1, j + 1), v01 = at(i, j + 1);
                triangle(v00, v10, v11);
                triangle(v00, v11, v01);
            }
        }
    }

    IndexedMesh build() { return IndexedMesh(vertices_, triangles_); }

private:
    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::map<std::tuple<long long, long long, long long>, VertexId> index_;
};

}  // namespace detail

// Flat nx x ny grid in the z = 0 plane covering [0, sx] x [0, sy].
inline IndexedMesh grid(int nx, int ny, double sx = 1.0, double sy = 1.0) {
    detail::MeshBuilder b;
    b.quad_grid(Vec3::Zero(), Vec3(sx, 0, 0), Vec3(0, sy, 0), nx, ny);
    return b.build();
}

// Closed box [0,sx]x[0,sy]x[0,sz], every face split into a regular grid with
// spacing close to 1/k of the shortest side.
inline IndexedMesh box(double sx, double sy, double sz, int k) {
    const double h = std::min({sx, sy, sz}) / k;
    const int nx = std::max(1, static_cast<int>(std::lround(sx / h)));
    const int ny = std::max(1, static_cast<int>(std::lround(sy / h)));
    const int nz = std::max(1, static_cast<int>(std::lround(sz / h)));
    detail::MeshBuilder b;
    const Vec3 X(sx, 0, 0), Y(0, sy, 0), Z(0, 0, sz);
    b.quad_grid(Vec3::Zero(), Y, X, ny, nx);  // z = 0, normal -z
    b.quad_grid(Z, X, Y, nx, ny);             // z = sz
    b.quad_grid(Vec3::Zero(), X, Z, nx, nz);  // y = 0, normal -y
    b.quad_grid(Y, Z, X, nz, nx);             // y = sy
    b.quad_grid(Vec3::Zero(), Z, Y, nz, ny);  // x = 0, normal -x
    b.quad_grid(X, Y, Z, ny, nz);             // x = sx
    return b.build();
}

inline IndexedMesh cube(int k) { return box(1.0, 1.0, 1.0, k); }

// Open cylinder (no caps) around the y axis: n_around columns, n_height rows.
inline IndexedMesh cylinder(int n_around, int n_height, double radius = 0.5, double height = 1.0) {
    std::vector<Vec3> v;
    std::vector<Triangle> t;
    for (int j = 0; j <= n_height; ++j) {
        for (int i = 0; i < n_around; ++i) {
            const double a = 2.0 * M_PI * i / n_around;
            v.emplace_back(radius * std::cos(a), height * j / n_height, radius * std::sin(a));
        }
    }
    auto id = [&](int i, int j) { return static_cast<VertexId>(j * n_around + (i % n_around)); };
    for (int j = 0; j < n_height; ++j) {
        for (int i = 0; i < n_around; ++i) {
            t.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
        }
    }
    return IndexedMesh(std::move(v), std::move(t));
}

// Outline of the L profile in the xy plane, counter-clockwise.
inline std::array<Vec2, 6> l_profile() {
    return {Vec2(0, 0), Vec2(2, 0), Vec2(2, 1), Vec2(1, 1), Vec2(1, 2), Vec2(0, 2)};
}

// L-shaped prism: the L profile extruded along z by depth, grid spacing 1/k.
inline IndexedMesh l_extrusion(int k, double depth = 1.0) {
    detail::MeshBuilder b;
    const Vec3 X(1, 0, 0), Y(0, 1, 0), Z(0, 0, depth);
    const int nd = std::max(1, static_cast<int>(std::lround(depth * k)));
    // Bottom (normal -z) and top (normal +z) caps as two rectangles each.
    b.quad_grid(Vec3::Zero(), Y, 2 * X, k, 2 * k);
    b.quad_grid(Vec3(0, 1, 0), Y, X, k, k);
    b.quad_grid(Z, 2 * X, Y, 2 * k, k);
    b.quad_grid(Z + Vec3(0, 1, 0), X, Y, k, k);
    const auto prof = l_profile();
    for (int e = 0; e < 6; ++e) {
        const Vec2 a = prof[e], c = prof[(e + 1) % 6];
        const Vec3 pa(a.x(), a.y(), 0), pc(c.x(), c.y(), 0);
        const int n = std::max(1, static_cast<int>(std::lround((c - a).norm() * k)));
        b.quad_grid(pa, pc - pa, Z, n, nd);
    }
    return b.build();
}

// Subdivided icosahedron projected onto a sphere of the given radius.
inline IndexedMesh icosphere(int subdivisions, double radius = 0.5) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                               {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (auto& p : v) p = p.normalized();
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<VertexId, VertexId>, VertexId> mid;
        auto midpoint = [&](VertexId a, VertexId b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const auto id = static_cast<VertexId>(v.size() - 1);
            mid.emplace(key, id);
            return id;
        };
        std::vector<Triangle> next;
        for (const auto& tri : f) {
            const auto ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    for (auto& p : v) p *= radius;
    return IndexedMesh(std::move(v), std::move(f));
}

inline IndexedMesh tetrahedron() {
    return IndexedMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
                       {Triangle{0, 2, 1}, Triangle{0, 1, 3}, Triangle{0, 3, 2}, Triangle{1, 2, 3}});
}

// Unit cube with 6 separate square UV islands laid out in a 3 x 2 grid.
inline IndexedMesh textured_cube() {
    const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    const std::array<std::array<VertexId, 4>, 6> quads = {{
        {0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {2, 3, 7, 6}, {0, 4, 7, 3}, {1, 2, 6, 5},
    }};
    std::vector<Triangle> tris;
    std::vector<Vec2> uv;
    for (int q = 0; q < 6; ++q) {
        const Vec2 o((q % 3) * 1.1, (q / 3) * 1.1);
        const std::array<Vec2, 4> c = {o, o + Vec2(1, 0), o + Vec2(1, 1), o + Vec2(0, 1)};
        const auto& f = quads[q];
        tris.push_back({f[0], f[1], f[2]});
        uv.insert(uv.end(), {c[0], c[1], c[2]});
        tris.push_back({f[0], f[2], f[3]});
        uv.insert(uv.end(), {c[0], c[2], c[3]});
    }
    return IndexedMesh(v, std::move(tris), std::move(uv));
}

// Seam segments given in the mesh's own coordinates, mapped into the
// canonical cube through the mesh's normalization.
inline SeamSet to_canonical(const SeamSet& seams, const NormalizationTransform& xf) {
    SeamSet out;
    for (const auto& s : seams) out.push_back({xf.apply(s.p1), xf.apply(s.p2)});
    return out;
}

// Cube-edge segments (model coordinates) of the box [0,sx]x[0,sy]x[0,sz].
// Corners are indexed by bits (x, y, z).
inline SeamSegment box_edge(double sx, double sy, double sz, int c0, int c1) {
    auto corner = [&](int c) { return Vec3((c & 1) ? sx : 0.0, (c & 2) ? sy : 0.0, (c & 4) ? sz : 0.0); };
    return {corner(c0), corner(c1)};
}

// Spanning tree of the box corners that unfolds into a cross: three edges of
// the top (y = sy) face plus the four vertical edges.
inline SeamSet box_cross_seams(double sx, double sy, double sz) {
    return {box_edge(sx, sy, sz, 2, 3), box_edge(sx, sy, sz, 3, 7), box_edge(sx, sy, sz, 7, 6),
            box_edge(sx, sy, sz, 0, 2), box_edge(sx, sy, sz, 1, 3), box_edge(sx, sy, sz, 5, 7),
            box_edge(sx, sy, sz, 4, 6)};
}

// All twelve box edges: one island per face.
inline SeamSet box_all_edges(double sx, double sy, double sz) {
    SeamSet s;
    for (int a = 0; a < 8; ++a) {
        for (int bit : {1, 2, 4}) {
            if (!(a & bit)) s.push_back(box_edge(sx, sy, sz, a, a | bit));
        }
    }
    return s;
}

// The four edges around the top (y = sy) face.
inline SeamSet box_top_loop(double sx, double sy, double sz) {
    return {box_edge(sx, sy, sz, 2, 3), box_edge(sx, sy, sz, 3, 7), box_edge(sx, sy, sz, 7, 6),
            box_edge(sx, sy, sz, 6, 2)};
}

// One vertical generator line of the open cylinder at angle 0.
inline SeamSet cylinder_generator(double radius = 0.5, double height = 1.0) {
    return {{Vec3(radius, 0, 0), Vec3(radius, height, 0)}};
}

// Horizontal ring of the open cylinder at row j, as n_around chords.
inline SeamSet cylinder_ring(int n_around, double y, double radius = 0.5) {
    SeamSet s;
    for (int i = 0; i < n_around; ++i) {
        const double a0 = 2.0 * M_PI * i / n_around, a1 = 2.0 * M_PI * (i + 1) / n_around;
        s.push_back({Vec3(radius * std::cos(a0), y, radius * std::sin(a0)),
                     Vec3(radius * std::cos(a1), y, radius * std::sin(a1))});
    }
    return s;
}

// Vertical edges of the L prism, one per profile corner.
inline SeamSegment l_vertical(int corner, double depth = 1.0) {
    const auto p = l_profile()[corner];
    return {Vec3(p.x(), p.y(), 0), Vec3(p.x(), p.y(), depth)};
}

inline SeamSegment l_top_edge(int e, double depth = 1.0) {
    const auto prof = l_profile();
    const auto a = prof[e], c = prof[(e + 1) % 6];
    return {Vec3(a.x(), a.y(), depth), Vec3(c.x(), c.y(), depth)};
}

// Spanning tree of the prism corners: five top-cap edges and all six verticals.
inline SeamSet l_tree_seams(double depth = 1.0) {
    SeamSet s;
    for (int e = 0; e < 5; ++e) s.push_back(l_top_edge(e, depth));
    for (int c = 0; c < 6; ++c) s.push_back(l_vertical(c, depth));
    return s;
}

}  // namespace seamkit::synthetic
