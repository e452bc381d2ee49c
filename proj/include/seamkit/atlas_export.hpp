#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mesh.hpp"
#include "seam_eval.hpp"
#include "uv_unwrap.hpp"

namespace seamkit {

// Translates islands onto shelves so they do not overlap. No rotation or
// scaling; islands keep the scale fixed by their pins.
inline std::vector<Vec2> layout_islands(const UVAtlas& atlas, double gap = 0.05) {
    const std::size_t n_islands = atlas.island_count();
    std::vector<Vec2> lo(n_islands, Vec2::Constant(INFINITY)), hi(n_islands, Vec2::Constant(-INFINITY));
    std::vector<std::size_t> island_of_vertex(atlas.uv.size(), 0);
    for (FaceId f = 0; f < atlas.cut.triangles.size(); ++f) {
        const auto i = atlas.cut.island[f];
        for (VertexId v : atlas.cut.triangles[f]) {
            island_of_vertex[v] = i;
            lo[i] = lo[i].cwiseMin(atlas.uv[v]);
            hi[i] = hi[i].cwiseMax(atlas.uv[v]);
        }
    }
    double area = 0.0;
    std::vector<std::size_t> order(n_islands);
    for (std::size_t i = 0; i < n_islands; ++i) {
        order[i] = i;
        area += (hi[i] - lo[i]).prod();
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (hi[a] - lo[a]).y() > (hi[b] - lo[b]).y();
    });
    double max_w = 0.0;
    for (std::size_t i = 0; i < n_islands; ++i) max_w = std::max(max_w, (hi[i] - lo[i]).x());
    const double row_width = std::max(max_w, 1.3 * std::sqrt(area));

    std::vector<Vec2> offset(n_islands, Vec2::Zero());
    double x = 0.0, y = 0.0, row_h = 0.0;
    for (std::size_t i : order) {
        const Vec2 size = hi[i] - lo[i];
        if (x > 0.0 && x + size.x() > row_width) {
            x = 0.0;
            y += row_h + gap;
            row_h = 0.0;
        }
        offset[i] = Vec2(x, y) - lo[i];
        x += size.x() + gap;
        row_h = std::max(row_h, size.y());
    }
    std::vector<Vec2> out(atlas.uv.size());
    for (std::size_t v = 0; v < atlas.uv.size(); ++v) out[v] = atlas.uv[v] + offset[island_of_vertex[v]];
    return out;
}

// Original vertices as v, one vt per cut vertex, faces as v/vt. Re-loading the
// file yields the input mesh with UVs whose seams are the atlas cuts.
inline std::string atlas_to_obj(const IndexedMesh& mesh, const UVAtlas& atlas) {
    const auto uv = layout_islands(atlas);
    std::string out;
    char buf[160];
    for (const auto& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out += buf;
    }
    for (const auto& t : uv) {
        std::snprintf(buf, sizeof buf, "vt %.9g %.9g\n", t.x(), t.y());
        out += buf;
    }
    for (const auto& t : atlas.cut.triangles) {
        std::snprintf(buf, sizeof buf, "f %u/%u %u/%u %u/%u\n", atlas.cut.original_vertex[t[0]] + 1,
                      t[0] + 1, atlas.cut.original_vertex[t[1]] + 1, t[1] + 1,
                      atlas.cut.original_vertex[t[2]] + 1, t[2] + 1);
        out += buf;
    }
    return out;
}

// Per-triangle |sigma1^2 - sigma2^2| on a light-to-bright yellow ramp,
// saturating at the 95th percentile. Excluded triangles are grey.
inline std::string atlas_to_svg(const UVAtlas& atlas, double pixels = 800.0) {
    const auto uv = layout_islands(atlas);
    std::vector<double> terms;
    for (const auto& s : atlas.sigma) {
        if (s) terms.push_back(conformal_term(*s));
    }
    double p95 = 0.0;
    if (!terms.empty()) {
        auto sorted = terms;
        std::sort(sorted.begin(), sorted.end());
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
        p95 = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
    }
    Vec2 lo = Vec2::Constant(INFINITY), hi = Vec2::Constant(-INFINITY);
    for (const auto& p : uv) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    if (uv.empty()) lo = hi = Vec2::Zero();
    const double extent = std::max({(hi - lo).maxCoeff(), 1e-12});
    const double s = pixels / extent;
    const double w = (hi.x() - lo.x()) * s, h = (hi.y() - lo.y()) * s;

    std::string out;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"-2 -2 %.3f %.3f\">\n",
                  w + 4, h + 4, w + 4, h + 4);
    out += buf;
    out += "<rect x=\"-2\" y=\"-2\" width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";
    for (FaceId f = 0; f < atlas.cut.triangles.size(); ++f) {
        int r = 128, g = 128, b = 128;
        if (atlas.sigma[f]) {
            const double t = p95 > 0.0 ? std::clamp(conformal_term(*atlas.sigma[f]) / p95, 0.0, 1.0) : 0.0;
            r = 255;
            g = static_cast<int>(std::lround(250.0 - 35.0 * t));
            b = static_cast<int>(std::lround(230.0 * (1.0 - t)));
        }
        const auto& tri = atlas.cut.triangles[f];
        out += "<polygon points=\"";
        for (int k = 0; k < 3; ++k) {
            const Vec2& p = uv[tri[k]];
            std::snprintf(buf, sizeof buf, "%.3f,%.3f ", (p.x() - lo.x()) * s, (hi.y() - p.y()) * s);
            out += buf;
        }
        std::snprintf(buf, sizeof buf,
                      "\" fill=\"rgb(%d,%d,%d)\" stroke=\"#404040\" stroke-width=\"0.3\"/>\n", r, g, b);
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace seamkit
