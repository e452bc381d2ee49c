#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "seam_project.hpp"
#include "seam_token.hpp"
#include "uv_unwrap.hpp"

namespace seamkit {

struct SeamMetrics {
    double distortion = 0.0;
    std::size_t fragments = 0;
    double runtime_s = 0.0;
    std::size_t excluded_triangles = 0;
};

// Recursive pairwise sum; the split points depend only on the length.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// |sigma1^2 - sigma2^2| of one triangle.
inline double conformal_term(const SingularValues& s) { return std::abs(s.s1 * s.s1 - s.s2 * s.s2); }

// Area-weighted mean of |sigma1^2 - sigma2^2| over non-excluded triangles,
// with weights taken from the 3D surface.
inline double distortion(const UVAtlas& atlas) {
    std::vector<double> weighted;
    std::vector<double> areas;
    for (std::size_t f = 0; f < atlas.sigma.size(); ++f) {
        if (!atlas.sigma[f]) continue;
        const double a = std::abs(atlas.area3d[f]);
        weighted.push_back(a * conformal_term(*atlas.sigma[f]));
        areas.push_back(a);
    }
    if (areas.empty()) throw UndefinedMetricError("every triangle is excluded");
    const double total = pairwise_sum(areas);
    if (!(total > 0.0)) throw UndefinedMetricError("zero total area");
    return pairwise_sum(weighted) / total;
}

// Number of UV islands.
inline std::size_t fragmentation(const UVAtlas& atlas) { return atlas.island_count(); }

struct Evaluation {
    SeamMetrics metrics;
    UVAtlas atlas;
    SeamEdgeSet seam_edges;
    std::vector<ProjectionDiagnostic> skipped_segments;
};

namespace eval_detail {

template <typename F>
auto run_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e.what());
    }
}

inline Evaluation finish(const IndexedMesh& normalized, SeamEdgeSet edges,
                         std::chrono::steady_clock::time_point start) {
    Evaluation ev;
    ev.atlas = run_stage("unwrap", [&] { return unwrap(normalized, edges); });
    ev.metrics.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ev.metrics.distortion = run_stage("metrics", [&] { return distortion(ev.atlas); });
    ev.metrics.fragments = fragmentation(ev.atlas);
    ev.metrics.excluded_triangles = ev.atlas.excluded_triangles;
    ev.seam_edges = std::move(edges);
    return ev;
}

}  // namespace eval_detail

// Full pipeline for seams given in canonical-cube coordinates: normalize,
// project, cut, unwrap, measure. runtime_s covers project + cut + unwrap.
inline Evaluation evaluate_full(const IndexedMesh& mesh, const SeamSet& seams) {
    using namespace eval_detail;
    const IndexedMesh normalized = run_stage("normalize", [&] { return normalize(mesh).first; });
    const auto start = std::chrono::steady_clock::now();
    auto projection = run_stage("project", [&] { return project_seams(normalized, seams); });
    Evaluation ev = finish(normalized, std::move(projection.seams), start);
    ev.skipped_segments = std::move(projection.skipped);
    return ev;
}

// Same pipeline for seams already expressed as mesh edges (e.g. from UVs).
inline Evaluation evaluate_edges_full(const IndexedMesh& mesh, const SeamEdgeSet& edges) {
    using namespace eval_detail;
    const IndexedMesh normalized = run_stage("normalize", [&] { return normalize(mesh).first; });
    return finish(normalized, edges, std::chrono::steady_clock::now());
}

inline SeamMetrics evaluate(const IndexedMesh& mesh, const SeamSet& seams) {
    return evaluate_full(mesh, seams).metrics;
}

// Dataset-level figures: plain means of the per-mesh values.
struct MetricsSummary {
    std::size_t meshes = 0;
    double mean_distortion = 0.0;
    double mean_fragments = 0.0;
    double mean_runtime_s = 0.0;
};

inline MetricsSummary summarize(std::span<const SeamMetrics> per_mesh) {
    if (per_mesh.empty()) throw ContractError("summarize needs at least one mesh");
    std::vector<double> d, f, r;
    for (const auto& m : per_mesh) {
        d.push_back(m.distortion);
        f.push_back(static_cast<double>(m.fragments));
        r.push_back(m.runtime_s);
    }
    const double n = static_cast<double>(per_mesh.size());
    return {per_mesh.size(), pairwise_sum(d) / n, pairwise_sum(f) / n, pairwise_sum(r) / n};
}

}  // namespace seamkit
