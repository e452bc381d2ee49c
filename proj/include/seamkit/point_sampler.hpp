#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "rng.hpp"

namespace seamkit {

inline constexpr std::size_t kFullCloudSize = 30720;
inline constexpr std::size_t kDeskCloudSize = 2048;

using PointCloud = std::vector<Vec3>;

struct TopologySample {
    PointCloud points;
    // Set when n < |V| and the vertex pass had to be thinned by FPS.
    bool truncated = false;
};

struct ConditioningClouds {
    PointCloud topo_points;
    PointCloud geom_points;
    std::uint64_t seed = 0;
};

// Greedy maximin selection starting from index 0. Ties go to the lowest index.
inline std::vector<std::size_t> fps_anchors(std::span<const Vec3> points, std::size_t k) {
    if (k < 1 || k > points.size()) {
        throw RangeError("fps_anchors: k=" + std::to_string(k) + " outside [1, " +
                         std::to_string(points.size()) + "]");
    }
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
    std::size_t current = 0;
    for (std::size_t step = 0; step < k; ++step) {
        chosen.push_back(current);
        const Vec3& c = points[current];
        std::size_t best = 0;
        double best_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = (points[i] - c).squaredNorm();
            if (d < dist[i]) dist[i] = d;
            if (dist[i] > best_d) {
                best_d = dist[i];
                best = i;
            }
        }
        current = best;
    }
    return chosen;
}

// All vertices first, then the remaining n - |V| points on edges picked with
// probability proportional to length, uniform in the open interval (0, 1).
inline TopologySample sample_topology(const IndexedMesh& mesh, std::size_t n, std::uint64_t seed) {
    if (mesh.edges().empty()) throw DegenerateInputError("sample_topology needs at least one edge");
    TopologySample out;
    const auto& verts = mesh.vertices();
    if (n < verts.size()) {
        out.truncated = true;
        for (std::size_t i : fps_anchors(verts, n)) out.points.push_back(verts[i]);
        return out;
    }
    out.points.reserve(n);
    out.points.insert(out.points.end(), verts.begin(), verts.end());
    const std::size_t extra = n - verts.size();
    if (extra == 0) return out;

    std::vector<double> lengths;
    lengths.reserve(mesh.edges().size());
    for (const auto& e : mesh.edges()) lengths.push_back(e.length);
    const DiscreteSampler pick(lengths);
    if (!(pick.total() > 0.0)) throw DegenerateInputError("all edges have zero length");

    Rng rng(seed);
    for (std::size_t i = 0; i < extra; ++i) {
        const auto& e = mesh.edges()[pick(rng)];
        const double t = rng.uniform_open();
        out.points.push_back((1.0 - t) * verts[e.key.a] + t * verts[e.key.b]);
    }
    return out;
}

// Uniform area sampling: triangle by area, then uniform barycentric.
inline PointCloud sample_surface(const IndexedMesh& mesh, std::size_t n, std::uint64_t seed) {
    std::vector<double> areas;
    areas.reserve(mesh.triangle_count());
    for (FaceId f = 0; f < mesh.triangle_count(); ++f) areas.push_back(mesh.face_area(f));
    const DiscreteSampler pick(areas);
    if (!(pick.total() > 0.0)) throw DegenerateInputError("mesh has zero surface area");

    const auto& verts = mesh.vertices();
    Rng rng(seed);
    PointCloud out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = mesh.triangles()[pick(rng)];
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const double a = 1.0 - r1;
        const double b = r1 * (1.0 - r2);
        const double c = r1 * r2;
        out.push_back(a * verts[t[0]] + b * verts[t[1]] + c * verts[t[2]]);
    }
    return out;
}

// Topology and geometry clouds from one seed. The geometry branch uses a
// derived seed so the two streams are independent.
inline ConditioningClouds sample_conditioning(const IndexedMesh& mesh, std::size_t n_topo,
                                              std::size_t n_geom, std::uint64_t seed) {
    ConditioningClouds c;
    c.seed = seed;
    c.topo_points = sample_topology(mesh, n_topo, seed).points;
    c.geom_points = sample_surface(mesh, n_geom, seed ^ 0x9e3779b97f4a7c15ULL);
    return c;
}

}  // namespace seamkit
