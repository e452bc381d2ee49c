#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include "error.hpp"
#include "mesh.hpp"
#include "obj_io.hpp"
#include "seam_eval.hpp"
#include "seam_token.hpp"

namespace seamkit {

// Writes through a sibling temp file and renames it into place.
inline void write_file_atomic(const std::string& path, std::string_view content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target);
}

namespace format_detail {

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = obj_detail::split_ws(line);
        if (!tok.empty()) f(line_no, tok);
    }
}

}  // namespace format_detail

// One segment per line: "x1 y1 z1 x2 y2 z2". '#' starts a comment.
inline SeamSet parse_seams(std::string_view text) {
    SeamSet out;
    format_detail::for_each_line(text, [&](std::size_t line, const auto& tok) {
        if (tok.size() != 6) throw ParseError(line, "seam line needs 6 numbers");
        double v[6];
        for (int i = 0; i < 6; ++i) v[i] = obj_detail::parse_double(tok[i], line);
        out.push_back({Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])});
    });
    return out;
}

inline std::string format_seams(const SeamSet& seams) {
    std::string out;
    char buf[256];
    for (const auto& s : seams) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g\n", s.p1.x(), s.p1.y(),
                      s.p1.z(), s.p2.x(), s.p2.y(), s.p2.z());
        out += buf;
    }
    return out;
}

// One integer token per line.
inline TokenSequence parse_tokens(std::string_view text) {
    TokenSequence out;
    format_detail::for_each_line(text, [&](std::size_t line, const auto& tok) {
        if (tok.size() != 1) throw ParseError(line, "expected one token per line");
        long v = 0;
        auto [p, ec] = std::from_chars(tok[0].data(), tok[0].data() + tok[0].size(), v);
        if (ec != std::errc() || p != tok[0].data() + tok[0].size()) {
            throw ParseError(line, "invalid token '" + std::string(tok[0]) + "'");
        }
        out.push_back(static_cast<Token>(v));
    });
    return out;
}

inline std::string format_tokens(const TokenSequence& tokens) {
    std::string out;
    for (Token t : tokens) {
        out += std::to_string(t);
        out += '\n';
    }
    return out;
}

// "vi vj" per line with vi < vj, sorted.
inline std::string format_seam_edges(const SeamEdgeSet& edges) {
    std::string out;
    for (const auto& [k, _] : edges.edges) out += std::to_string(k.a) + " " + std::to_string(k.b) + "\n";
    return out;
}

inline SeamEdgeSet parse_seam_edges(std::string_view text) {
    SeamEdgeSet out;
    format_detail::for_each_line(text, [&](std::size_t line, const auto& tok) {
        if (tok.size() != 2) throw ParseError(line, "edge line needs 2 vertex indices");
        long a = 0, b = 0;
        auto r1 = std::from_chars(tok[0].data(), tok[0].data() + tok[0].size(), a);
        auto r2 = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), b);
        if (r1.ec != std::errc() || r2.ec != std::errc() || a < 0 || b < 0) {
            throw ParseError(line, "invalid vertex index");
        }
        out.insert(EdgeKey(static_cast<VertexId>(a), static_cast<VertexId>(b)));
    });
    return out;
}

inline std::string format_xyz(const std::vector<Vec3>& points) {
    std::string out;
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out += buf;
    }
    return out;
}

inline nlohmann::ordered_json metrics_to_json(const SeamMetrics& m) {
    nlohmann::ordered_json j;
    j["distortion"] = m.distortion;
    j["fragments"] = m.fragments;
    j["runtime_s"] = m.runtime_s;
    j["excluded_triangles"] = m.excluded_triangles;
    return j;
}

inline SeamMetrics metrics_from_json(const nlohmann::json& j) {
    SeamMetrics m;
    m.distortion = j.at("distortion").get<double>();
    m.fragments = j.at("fragments").get<std::size_t>();
    m.runtime_s = j.value("runtime_s", 0.0);
    m.excluded_triangles = j.value("excluded_triangles", std::size_t{0});
    return m;
}

}  // namespace seamkit
