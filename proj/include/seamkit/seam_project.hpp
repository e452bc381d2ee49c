#pragma once

#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "seam_token.hpp"

namespace seamkit {

// Exact linear scan; ties resolve to the lowest vertex index.
inline VertexId nearest_vertex(const IndexedMesh& mesh, const Vec3& p) {
    if (mesh.vertex_count() == 0) throw ContractError("nearest_vertex on an empty mesh");
    VertexId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    const auto& v = mesh.vertices();
    for (VertexId i = 0; i < v.size(); ++i) {
        const double d = (v[i] - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

// Dijkstra from a to b. Among equal-length predecessors the lower vertex
// index wins, which makes the returned path deterministic.
inline std::vector<VertexId> shortest_path(const EdgeGraph& graph, VertexId a, VertexId b) {
    const auto n = graph.node_count();
    if (a >= n || b >= n) throw IndexError("shortest_path: vertex out of range");
    if (a == b) return {a};

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr VertexId none = std::numeric_limits<VertexId>::max();
    std::vector<double> dist(n, inf);
    std::vector<VertexId> pred(n, none);
    std::vector<bool> done(n, false);
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[a] = 0.0;
    queue.push({0.0, a});
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (done[u]) continue;
        if (d > dist[b]) break;
        done[u] = true;
        for (const auto& arc : graph.adjacency[u]) {
            const double nd = d + arc.length;
            if (nd < dist[arc.to]) {
                dist[arc.to] = nd;
                pred[arc.to] = u;
                queue.push({nd, arc.to});
            } else if (nd == dist[arc.to] && u < pred[arc.to] && !done[arc.to]) {
                pred[arc.to] = u;
            }
        }
    }
    if (dist[b] == inf) {
        throw UnreachableError("vertices " + std::to_string(a) + " and " + std::to_string(b) +
                               " lie in different components");
    }
    std::vector<VertexId> path{b};
    for (VertexId v = b; v != a;) {
        v = pred[v];
        path.push_back(v);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

inline double path_length(const EdgeGraph& graph, const std::vector<VertexId>& path) {
    double total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& arc : graph.adjacency[path[i - 1]]) {
            if (arc.to == path[i]) w = std::min(w, arc.length);
        }
        total += w;
    }
    return total;
}

struct ProjectionDiagnostic {
    std::size_t segment = 0;
    std::string message;
};

struct ProjectionResult {
    SeamEdgeSet seams;
    std::vector<ProjectionDiagnostic> skipped;
};

// Endpoints snap to their nearest vertices, the graph shortest path between
// them is marked. Segments whose endpoints cannot be connected are skipped
// and reported.
inline ProjectionResult project_seams(const IndexedMesh& mesh, const EdgeGraph& graph,
                                      const SeamSet& seams) {
    if (mesh.vertex_count() == 0) throw ContractError("project_seams on an empty mesh");
    ProjectionResult out;
    for (std::size_t i = 0; i < seams.size(); ++i) {
        const VertexId a = nearest_vertex(mesh, seams[i].p1);
        const VertexId b = nearest_vertex(mesh, seams[i].p2);
        if (a == b) continue;
        try {
            const auto path = shortest_path(graph, a, b);
            for (std::size_t k = 1; k < path.size(); ++k) {
                out.seams.insert(EdgeKey(path[k - 1], path[k]), i);
            }
        } catch (const UnreachableError& e) {
            out.skipped.push_back({i, e.what()});
        }
    }
    return out;
}

inline ProjectionResult project_seams(const IndexedMesh& mesh, const SeamSet& seams) {
    return project_seams(mesh, build_edge_graph(mesh), seams);
}

}  // namespace seamkit
