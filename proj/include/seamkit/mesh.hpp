#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "error.hpp"

namespace seamkit {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using VertexId = std::uint32_t;
using FaceId = std::uint32_t;
using Triangle = std::array<VertexId, 3>;

// Undirected vertex pair, always stored with a < b.
struct EdgeKey {
    VertexId a = 0;
    VertexId b = 0;

    EdgeKey() = default;
    EdgeKey(VertexId u, VertexId v) : a(std::min(u, v)), b(std::max(u, v)) {}

    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct MeshEdge {
    EdgeKey key;
    double length = 0.0;
    std::vector<FaceId> faces;  // 1 for boundary, 2 for interior, more if non-manifold
};

// Set of mesh edges marked as seams. Provenance lists, per edge, the seam
// segments whose projected path crossed it (empty when the set came from UVs).
struct SeamEdgeSet {
    std::map<EdgeKey, std::vector<std::size_t>> edges;

    bool contains(EdgeKey e) const { return edges.count(e) != 0; }
    std::size_t size() const { return edges.size(); }
    bool empty() const { return edges.empty(); }
    void insert(EdgeKey e) { edges.try_emplace(e); }
    void insert(EdgeKey e, std::size_t segment) { edges[e].push_back(segment); }

    std::vector<EdgeKey> keys() const {
        std::vector<EdgeKey> out;
        out.reserve(edges.size());
        for (const auto& [k, _] : edges) out.push_back(k);
        return out;
    }
};

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Immutable indexed triangle mesh with derived edge adjacency.
class IndexedMesh {
public:
    IndexedMesh() = default;

    IndexedMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                std::optional<std::vector<Vec2>> uv_corners = std::nullopt)
        : vertices_(std::move(vertices)),
          triangles_(std::move(triangles)),
          uv_corners_(std::move(uv_corners)) {
        const auto nv = vertices_.size();
        for (std::size_t f = 0; f < triangles_.size(); ++f) {
            const auto& t = triangles_[f];
            for (VertexId v : t) {
                if (v >= nv) {
                    throw IndexError("triangle " + std::to_string(f) + " references vertex " +
                                     std::to_string(v) + " of " + std::to_string(nv));
                }
            }
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
                throw DegenerateInputError("triangle " + std::to_string(f) +
                                           " repeats a vertex index");
            }
        }
        if (uv_corners_ && uv_corners_->size() != 3 * triangles_.size()) {
            throw ContractError("uv_corners must hold 3 entries per triangle");
        }
        build_edges();
    }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::optional<std::vector<Vec2>>& uv_corners() const { return uv_corners_; }
    bool has_uv() const { return uv_corners_.has_value(); }
    const std::vector<MeshEdge>& edges() const { return edges_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    // Index into edges(), or nullopt when (u, v) is not a mesh edge.
    std::optional<std::size_t> find_edge(VertexId u, VertexId v) const {
        const EdgeKey key(u, v);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                                   [](const MeshEdge& e, const EdgeKey& k) { return e.key < k; });
        if (it == edges_.end() || it->key != key) return std::nullopt;
        return static_cast<std::size_t>(it - edges_.begin());
    }

    bool has_edge(VertexId u, VertexId v) const { return find_edge(u, v).has_value(); }

    std::size_t non_manifold_edge_count() const {
        return static_cast<std::size_t>(std::count_if(
            edges_.begin(), edges_.end(), [](const MeshEdge& e) { return e.faces.size() > 2; }));
    }

    double face_area(FaceId f) const {
        const auto& t = triangles_[f];
        return triangle_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    }

    double total_area() const {
        double a = 0.0;
        for (FaceId f = 0; f < triangles_.size(); ++f) a += face_area(f);
        return a;
    }

    friend bool operator==(const IndexedMesh& x, const IndexedMesh& y) {
        return x.vertices_ == y.vertices_ && x.triangles_ == y.triangles_ &&
               x.uv_corners_ == y.uv_corners_;
    }

private:
    void build_edges() {
        std::vector<std::pair<EdgeKey, FaceId>> incid;
        incid.reserve(triangles_.size() * 3);
        for (FaceId f = 0; f < triangles_.size(); ++f) {
            const auto& t = triangles_[f];
            for (int k = 0; k < 3; ++k) incid.emplace_back(EdgeKey(t[k], t[(k + 1) % 3]), f);
        }
        std::sort(incid.begin(), incid.end());
        for (const auto& [key, f] : incid) {
            if (edges_.empty() || edges_.back().key != key) {
                MeshEdge e;
                e.key = key;
                e.length = (vertices_[key.a] - vertices_[key.b]).norm();
                edges_.push_back(std::move(e));
            }
            auto& faces = edges_.back().faces;
            if (faces.empty() || faces.back() != f) faces.push_back(f);
        }
    }

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::optional<std::vector<Vec2>> uv_corners_;
    std::vector<MeshEdge> edges_;
};

// Maps model coordinates into the canonical cube: p' = (p - center) * scale.
struct NormalizationTransform {
    Vec3 center = Vec3::Zero();
    double scale = 1.0;

    Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
    Vec3 invert(const Vec3& p) const { return p / scale + center; }
};

inline IndexedMesh transform_mesh(const IndexedMesh& mesh, const NormalizationTransform& xf) {
    std::vector<Vec3> v;
    v.reserve(mesh.vertex_count());
    for (const auto& p : mesh.vertices()) v.push_back(xf.apply(p));
    return IndexedMesh(std::move(v), mesh.triangles(), mesh.uv_corners());
}

// Uniformly rescales and centers the mesh so the bounding box sits in
// [-0.5, 0.5]^3 with its longest axis spanning the full interval.
inline std::pair<IndexedMesh, NormalizationTransform> normalize(const IndexedMesh& mesh) {
    if (mesh.vertex_count() == 0) throw DegenerateInputError("cannot normalize an empty mesh");
    Vec3 lo = mesh.vertices().front();
    Vec3 hi = lo;
    for (const auto& p : mesh.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double extent = (hi - lo).maxCoeff();
    if (!(extent > 0.0) || !std::isfinite(extent)) {
        throw DegenerateInputError("bounding box has zero extent");
    }
    NormalizationTransform xf;
    xf.center = 0.5 * (lo + hi);
    xf.scale = 1.0 / extent;
    return {transform_mesh(mesh, xf), xf};
}

// Vertex adjacency graph with Euclidean edge weights.
struct EdgeGraph {
    struct Arc {
        VertexId to;
        double length;
    };
    std::vector<std::vector<Arc>> adjacency;

    std::size_t node_count() const { return adjacency.size(); }

    std::size_t arc_count() const {
        std::size_t n = 0;
        for (const auto& a : adjacency) n += a.size();
        return n / 2;
    }
};

inline EdgeGraph build_edge_graph(const IndexedMesh& mesh) {
    EdgeGraph g;
    g.adjacency.resize(mesh.vertex_count());
    for (const auto& e : mesh.edges()) {
        g.adjacency[e.key.a].push_back({e.key.b, e.length});
        g.adjacency[e.key.b].push_back({e.key.a, e.length});
    }
    for (auto& arcs : g.adjacency) {
        std::sort(arcs.begin(), arcs.end(),
                  [](const EdgeGraph::Arc& x, const EdgeGraph::Arc& y) { return x.to < y.to; });
    }
    return g;
}

inline constexpr double kUvSeamTolerance = 1e-7;

// Interior edges where the two incident corners of a shared vertex carry
// different UVs. Non-manifold edges compare every pair of incident faces.
inline SeamEdgeSet extract_uv_seams(const IndexedMesh& mesh) {
    if (!mesh.has_uv()) throw ContractError("extract_uv_seams requires per-corner UVs");
    const auto& uv = *mesh.uv_corners();
    const auto& tris = mesh.triangles();

    auto corner_uv = [&](FaceId f, VertexId v) -> const Vec2& {
        const auto& t = tris[f];
        const int k = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
        return uv[3 * f + k];
    };
    auto differs = [](const Vec2& p, const Vec2& q) {
        return (p - q).cwiseAbs().maxCoeff() > kUvSeamTolerance;
    };

    SeamEdgeSet out;
    for (const auto& e : mesh.edges()) {
        if (e.faces.size() < 2) continue;
        bool seam = false;
        for (std::size_t i = 0; i < e.faces.size() && !seam; ++i) {
            for (std::size_t j = i + 1; j < e.faces.size() && !seam; ++j) {
                for (VertexId v : {e.key.a, e.key.b}) {
                    if (differs(corner_uv(e.faces[i], v), corner_uv(e.faces[j], v))) {
                        seam = true;
                        break;
                    }
                }
            }
        }
        if (seam) out.insert(e.key);
    }
    return out;
}

}  // namespace seamkit
