#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "error.hpp"
#include "mesh.hpp"

namespace seamkit {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // The smaller root survives, so roots are the minimum element of each set.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

// Mesh split along seam edges. Cut vertex i copies original_vertex[i]; one copy
// exists per corner wedge bounded by seam or boundary edges.
struct CutMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<VertexId> original_vertex;
    std::vector<std::size_t> island;  // per triangle
    std::size_t island_count = 0;

    std::vector<FaceId> island_faces(std::size_t id) const {
        std::vector<FaceId> out;
        for (FaceId f = 0; f < triangles.size(); ++f) {
            if (island[f] == id) out.push_back(f);
        }
        return out;
    }
};

inline CutMesh cut_mesh(const IndexedMesh& mesh, const SeamEdgeSet& seams) {
    for (const auto& [e, _] : seams.edges) {
        if (!mesh.has_edge(e.a, e.b)) {
            throw ContractError("seam edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                                ") is not a mesh edge");
        }
    }
    const auto& tris = mesh.triangles();
    const std::size_t nf = tris.size();
    auto corner = [&](FaceId f, VertexId v) -> std::size_t {
        const auto& t = tris[f];
        return 3 * f + (t[0] == v ? 0 : (t[1] == v ? 1 : 2));
    };

    UnionFind corners(3 * nf);
    UnionFind faces(nf);
    for (const auto& e : mesh.edges()) {
        if (e.faces.size() < 2 || seams.contains(e.key)) continue;
        const FaceId f0 = e.faces[0];
        for (std::size_t i = 1; i < e.faces.size(); ++i) {
            const FaceId fi = e.faces[i];
            faces.unite(f0, fi);
            corners.unite(corner(f0, e.key.a), corner(fi, e.key.a));
            corners.unite(corner(f0, e.key.b), corner(fi, e.key.b));
        }
    }

    // Cut vertices ordered by (original vertex, first corner of the wedge).
    std::vector<std::pair<VertexId, std::size_t>> wedges;
    for (std::size_t c = 0; c < 3 * nf; ++c) {
        if (corners.find(c) == c) wedges.emplace_back(tris[c / 3][c % 3], c);
    }
    std::sort(wedges.begin(), wedges.end());
    std::vector<VertexId> root_to_cut(3 * nf, 0);
    CutMesh cut;
    cut.vertices.reserve(wedges.size());
    for (std::size_t i = 0; i < wedges.size(); ++i) {
        root_to_cut[wedges[i].second] = static_cast<VertexId>(i);
        cut.vertices.push_back(mesh.vertices()[wedges[i].first]);
        cut.original_vertex.push_back(wedges[i].first);
    }
    cut.triangles.resize(nf);
    for (FaceId f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) cut.triangles[f][k] = root_to_cut[corners.find(3 * f + k)];
    }

    std::map<std::size_t, std::size_t> island_of_root;
    cut.island.resize(nf);
    for (FaceId f = 0; f < nf; ++f) {
        auto [it, _] = island_of_root.try_emplace(faces.find(f), island_of_root.size());
        cut.island[f] = it->second;
    }
    cut.island_count = island_of_root.size();
    return cut;
}

struct SingularValues {
    double s1 = 0.0;
    double s2 = 0.0;
};

// Singular values of the map from the triangle's own plane to UV. Uses the
// conformal / anti-conformal split of the 2x2 Jacobian. Returns nullopt for a
// zero-area 3D triangle.
inline std::optional<SingularValues> triangle_jacobian(const std::array<Vec3, 3>& p3d,
                                                       const std::array<Vec2, 3>& p2d) {
    const Vec3 e1 = p3d[1] - p3d[0];
    const Vec3 e2 = p3d[2] - p3d[0];
    const Vec3 n = e1.cross(e2);
    const double scale = std::max({e1.squaredNorm(), e2.squaredNorm(), (p3d[2] - p3d[1]).squaredNorm()});
    if (!(n.norm() > 1e-14 * scale) || !std::isfinite(n.norm())) return std::nullopt;

    const Vec3 ax = e1.normalized();
    const Vec3 ay = n.normalized().cross(ax);
    Eigen::Matrix2d local;
    local << e1.norm(), e2.dot(ax), 0.0, e2.dot(ay);
    Eigen::Matrix2d uv;
    uv.col(0) = p2d[1] - p2d[0];
    uv.col(1) = p2d[2] - p2d[0];
    const Eigen::Matrix2d J = uv * local.inverse();

    const double a = J(0, 0), b = J(0, 1), c = J(1, 0), d = J(1, 1);
    const double q = 0.5 * std::hypot(a + d, c - b);
    const double r = 0.5 * std::hypot(a - d, c + b);
    return SingularValues{q + r, std::abs(q - r)};
}

struct IslandDiagnostics {
    std::size_t island = 0;
    bool non_disk = false;
    std::size_t pin0 = 0;  // cut vertex ids
    std::size_t pin1 = 0;
    double relative_residual = 0.0;
};

struct UVAtlas {
    CutMesh cut;
    std::vector<Vec2> uv;                                // per cut vertex
    std::vector<std::optional<SingularValues>> sigma;    // nullopt = excluded
    std::vector<double> area3d;                          // per triangle
    std::vector<IslandDiagnostics> islands;
    std::size_t excluded_triangles = 0;

    std::size_t island_count() const { return cut.island_count; }
};

inline constexpr double kDegenerateAreaFraction = 1e-12;
inline constexpr double kLscmResidualBound = 1e-8;

namespace lscm_detail {

// Local 2D coordinates of a triangle in its own plane (counter-clockwise).
inline std::array<Vec2, 3> flatten(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    const Vec3 e1 = p1 - p0;
    const Vec3 e2 = p2 - p0;
    const Vec3 ax = e1.normalized();
    const Vec3 ay = e1.cross(e2).normalized().cross(ax);
    return {Vec2(0.0, 0.0), Vec2(e1.norm(), 0.0), Vec2(e2.dot(ax), e2.dot(ay))};
}

// Farthest vertex by unweighted BFS; ties go to the lowest local index.
inline std::size_t bfs_farthest(const std::vector<std::vector<std::size_t>>& adj, std::size_t start) {
    std::vector<int> depth(adj.size(), -1);
    std::deque<std::size_t> queue{start};
    depth[start] = 0;
    std::size_t best = start;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (depth[u] > depth[best] || (depth[u] == depth[best] && u < best)) best = u;
        for (auto v : adj[u]) {
            if (depth[v] < 0) {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return best;
}

}  // namespace lscm_detail

// Least-squares conformal map of one island. The double-sweep BFS pair is
// pinned to (0,0) and (1,0). Writes into atlas.uv for the island's vertices.
inline IslandDiagnostics parameterize_island(const CutMesh& cut, std::size_t island,
                                             std::vector<Vec2>& uv_out, double area_threshold) {
    using Triplet = Eigen::Triplet<double>;
    const auto faces = cut.island_faces(island);
    if (faces.empty()) throw DegenerateIslandError("island " + std::to_string(island) + " is empty");

    std::map<VertexId, std::size_t> local;
    std::vector<VertexId> global;
    for (FaceId f : faces) {
        for (VertexId v : cut.triangles[f]) {
            if (local.try_emplace(v, global.size()).second) global.push_back(v);
        }
    }
    const std::size_t n = global.size();
    std::vector<std::vector<std::size_t>> adj(n);
    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    for (FaceId f : faces) {
        const auto& t = cut.triangles[f];
        for (int k = 0; k < 3; ++k) {
            auto a = local[t[k]], b = local[t[(k + 1) % 3]];
            if (edge_set.insert({std::min(a, b), std::max(a, b)}).second) {
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
        }
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    IslandDiagnostics diag;
    diag.island = island;
    // Disk iff Euler characteristic 1 and at least one boundary edge.
    {
        std::map<std::pair<std::size_t, std::size_t>, int> use;
        for (FaceId f : faces) {
            const auto& t = cut.triangles[f];
            for (int k = 0; k < 3; ++k) {
                auto a = local[t[k]], b = local[t[(k + 1) % 3]];
                ++use[{std::min(a, b), std::max(a, b)}];
            }
        }
        bool has_boundary = false;
        for (const auto& [_, c] : use) has_boundary = has_boundary || c == 1;
        const long chi = static_cast<long>(n) - static_cast<long>(use.size()) + static_cast<long>(faces.size());
        diag.non_disk = !(chi == 1 && has_boundary);
    }

    const std::size_t pin0 = lscm_detail::bfs_farthest(adj, lscm_detail::bfs_farthest(adj, 0));
    const std::size_t pin1 = lscm_detail::bfs_farthest(adj, pin0);
    diag.pin0 = global[pin0];
    diag.pin1 = global[pin1];

    // Unknown layout: [u_0, v_0, u_1, v_1, ...] over non-pinned vertices.
    std::vector<long> unknown(n, -1);
    std::size_t nu = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != pin0 && i != pin1) unknown[i] = static_cast<long>(nu++);
    }
    std::vector<Vec2> pinned(n, Vec2::Zero());
    pinned[pin0] = Vec2(0.0, 0.0);
    pinned[pin1] = Vec2(1.0, 0.0);

    std::vector<Triplet> trips;
    std::vector<double> rhs;
    std::size_t row = 0;
    auto add_term = [&](std::size_t vertex, int comp, double coeff) {
        if (coeff == 0.0) return;
        if (unknown[vertex] >= 0) {
            trips.emplace_back(row, 2 * unknown[vertex] + comp, coeff);
        } else {
            rhs.back() -= coeff * pinned[vertex][comp];
        }
    };

    std::vector<bool> covered(n, false);
    for (FaceId f : faces) {
        const auto& t = cut.triangles[f];
        const Vec3& p0 = cut.vertices[t[0]];
        const Vec3& p1 = cut.vertices[t[1]];
        const Vec3& p2 = cut.vertices[t[2]];
        const double area = triangle_area(p0, p1, p2);
        if (!(area > area_threshold)) continue;
        const auto q = lscm_detail::flatten(p0, p1, p2);
        const double w = std::sqrt(area);
        std::array<double, 3> gx{}, gy{};
        for (int j = 0; j < 3; ++j) {
            const Vec2 e = q[(j + 2) % 3] - q[(j + 1) % 3];
            gx[j] = -e.y() / (2.0 * area);
            gy[j] = e.x() / (2.0 * area);
        }
        // Cauchy-Riemann residuals: v_x + u_y and v_y - u_x.
        rhs.push_back(0.0);
        for (int j = 0; j < 3; ++j) {
            const auto v = local[t[j]];
            add_term(v, 1, w * gx[j]);
            add_term(v, 0, w * gy[j]);
        }
        ++row;
        rhs.push_back(0.0);
        for (int j = 0; j < 3; ++j) {
            const auto v = local[t[j]];
            add_term(v, 1, w * gy[j]);
            add_term(v, 0, -w * gx[j]);
        }
        ++row;
        for (int j = 0; j < 3; ++j) covered[local[t[j]]] = true;
    }
    if (row == 0) {
        throw DegenerateIslandError("island " + std::to_string(island) + " has zero area");
    }
    // Vertices touched only by degenerate triangles follow their neighbours.
    for (std::size_t i = 0; i < n; ++i) {
        if (covered[i] || unknown[i] < 0) continue;
        for (auto nb : adj[i]) {
            for (int comp = 0; comp < 2; ++comp) {
                rhs.push_back(0.0);
                add_term(i, comp, 1.0);
                add_term(nb, comp, -1.0);
                ++row;
            }
        }
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<long>(2 * nu));
    if (nu > 0) {
        Eigen::SparseMatrix<double> A(static_cast<long>(row), static_cast<long>(2 * nu));
        A.setFromTriplets(trips.begin(), trips.end());
        const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<long>(rhs.size()));
        const Eigen::SparseMatrix<double> N = A.transpose() * A;
        const Eigen::VectorXd atb = A.transpose() * b;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(N);
        if (solver.info() != Eigen::Success) {
            throw DegenerateIslandError("island " + std::to_string(island) + ": singular system");
        }
        x = solver.solve(atb);
        const double denom = std::max(atb.norm(), 1e-300);
        double residual = (N * x - atb).norm() / denom;
        for (int it = 0; it < 3 && residual > kLscmResidualBound; ++it) {
            x += solver.solve(atb - N * x);
            residual = (N * x - atb).norm() / denom;
        }
        if (!x.allFinite() || residual > kLscmResidualBound) {
            throw DegenerateIslandError("island " + std::to_string(island) +
                                        ": solve residual " + std::to_string(residual));
        }
        diag.relative_residual = residual;
    }
    for (std::size_t i = 0; i < n; ++i) {
        uv_out[global[i]] = unknown[i] >= 0 ? Vec2(x[2 * unknown[i]], x[2 * unknown[i] + 1]) : pinned[i];
    }
    return diag;
}

// Per-triangle singular values and areas for a cut mesh with given UVs.
// Triangles below kDegenerateAreaFraction of the total area are excluded.
inline UVAtlas make_atlas(CutMesh cut, std::vector<Vec2> uv) {
    if (uv.size() != cut.vertices.size()) throw ContractError("one UV per cut vertex required");
    UVAtlas atlas;
    const std::size_t nf = cut.triangles.size();
    atlas.area3d.resize(nf);
    double total = 0.0;
    for (FaceId f = 0; f < nf; ++f) {
        const auto& t = cut.triangles[f];
        atlas.area3d[f] = triangle_area(cut.vertices[t[0]], cut.vertices[t[1]], cut.vertices[t[2]]);
        total += atlas.area3d[f];
    }
    atlas.sigma.resize(nf);
    for (FaceId f = 0; f < nf; ++f) {
        const auto& t = cut.triangles[f];
        if (!(atlas.area3d[f] >= kDegenerateAreaFraction * total) || atlas.area3d[f] == 0.0) {
            ++atlas.excluded_triangles;
            continue;
        }
        atlas.sigma[f] = triangle_jacobian({cut.vertices[t[0]], cut.vertices[t[1]], cut.vertices[t[2]]},
                                           {uv[t[0]], uv[t[1]], uv[t[2]]});
        if (!atlas.sigma[f]) ++atlas.excluded_triangles;
    }
    atlas.cut = std::move(cut);
    atlas.uv = std::move(uv);
    return atlas;
}

// Cut, then parameterize every island independently.
inline UVAtlas unwrap(const IndexedMesh& mesh, const SeamEdgeSet& seams) {
    CutMesh cut = cut_mesh(mesh, seams);
    std::vector<Vec2> uv(cut.vertices.size(), Vec2::Zero());
    const double threshold = kDegenerateAreaFraction * mesh.total_area();
    std::vector<IslandDiagnostics> diags;
    diags.reserve(cut.island_count);
    for (std::size_t i = 0; i < cut.island_count; ++i) {
        diags.push_back(parameterize_island(cut, i, uv, threshold));
    }
    UVAtlas atlas = make_atlas(std::move(cut), std::move(uv));
    atlas.islands = std::move(diags);
    return atlas;
}

}  // namespace seamkit
