#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"

namespace seamkit {

namespace obj_detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
    double value = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(line, "invalid number '" + std::string(s) + "'");
    }
    return value;
}

inline long parse_index(std::string_view s, std::size_t line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || value == 0) {
        throw ParseError(line, "invalid index '" + std::string(s) + "'");
    }
    return value;
}

// OBJ indices are 1-based; negative values count back from the latest entry.
inline std::size_t resolve_index(long idx, std::size_t count, std::size_t line, const char* what) {
    const long resolved = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
    if (resolved < 0 || static_cast<std::size_t>(resolved) >= count) {
        throw IndexError("line " + std::to_string(line) + ": " + what + " index " +
                         std::to_string(idx) + " out of range (" + std::to_string(count) + ")");
    }
    return static_cast<std::size_t>(resolved);
}

}  // namespace obj_detail

// Parses the v / vt / f subset of Wavefront OBJ. Polygons are fan-triangulated
// from their first vertex. UVs are kept only if every face references vt.
inline IndexedMesh load_obj(std::string_view text) {
    using namespace obj_detail;
    std::vector<Vec3> positions;
    std::vector<Vec2> texcoords;
    std::vector<Triangle> triangles;
    std::vector<Vec2> corner_uv;
    bool all_faces_textured = true;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;

        if (tok[0] == "v") {
            if (tok.size() < 4) throw ParseError(line_no, "vertex needs 3 coordinates");
            positions.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                   parse_double(tok[3], line_no));
        } else if (tok[0] == "vt") {
            if (tok.size() < 3) throw ParseError(line_no, "texture coordinate needs 2 values");
            texcoords.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no));
        } else if (tok[0] == "f") {
            if (tok.size() < 4) throw ParseError(line_no, "face needs at least 3 vertices");
            std::vector<VertexId> vids;
            std::vector<long> tids;
            bool textured = true;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                const std::string_view ref = tok[i];
                const auto s1 = ref.find('/');
                const std::string_view vpart = ref.substr(0, s1);
                vids.push_back(static_cast<VertexId>(
                    resolve_index(parse_index(vpart, line_no), positions.size(), line_no, "vertex")));
                if (s1 == std::string_view::npos) {
                    textured = false;
                    continue;
                }
                const auto rest = ref.substr(s1 + 1);
                const auto s2 = rest.find('/');
                const std::string_view tpart = rest.substr(0, s2);
                if (tpart.empty()) {
                    textured = false;
                    continue;
                }
                tids.push_back(static_cast<long>(
                    resolve_index(parse_index(tpart, line_no), texcoords.size(), line_no, "texcoord")));
            }
            for (std::size_t i = 1; i + 1 < vids.size(); ++i) {
                const Triangle t{vids[0], vids[i], vids[i + 1]};
                if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
                    throw ParseError(line_no, "degenerate face repeats a vertex");
                }
                triangles.push_back(t);
                if (textured) {
                    corner_uv.push_back(texcoords[tids[0]]);
                    corner_uv.push_back(texcoords[tids[i]]);
                    corner_uv.push_back(texcoords[tids[i + 1]]);
                }
            }
            all_faces_textured = all_faces_textured && textured;
        }
        // Other records (vn, o, g, s, usemtl, mtllib, ...) carry nothing we use.
    }

    std::optional<std::vector<Vec2>> uv;
    if (all_faces_textured && !triangles.empty()) uv = std::move(corner_uv);
    return IndexedMesh(std::move(positions), std::move(triangles), std::move(uv));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline IndexedMesh load_obj_file(const std::string& path) { return load_obj(read_text_file(path)); }

// Writes v, vt and f records with 9 significant digits. Identical UV values
// share one vt record.
inline std::string to_obj(const IndexedMesh& mesh) {
    std::string out;
    char buf[128];
    for (const auto& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out += buf;
    }
    std::vector<std::size_t> corner_vt;
    if (mesh.has_uv()) {
        const auto& uv = *mesh.uv_corners();
        std::map<std::pair<double, double>, std::size_t> ids;
        corner_vt.reserve(uv.size());
        for (const auto& t : uv) {
            auto [it, inserted] = ids.try_emplace({t.x(), t.y()}, ids.size());
            if (inserted) {
                std::snprintf(buf, sizeof buf, "vt %.9g %.9g\n", t.x(), t.y());
                out += buf;
            }
            corner_vt.push_back(it->second);
        }
    }
    const auto& tris = mesh.triangles();
    for (std::size_t f = 0; f < tris.size(); ++f) {
        const auto& t = tris[f];
        if (mesh.has_uv()) {
            std::snprintf(buf, sizeof buf, "f %u/%zu %u/%zu %u/%zu\n", t[0] + 1, corner_vt[3 * f] + 1,
                          t[1] + 1, corner_vt[3 * f + 1] + 1, t[2] + 1, corner_vt[3 * f + 2] + 1);
        } else {
            std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out += buf;
    }
    return out;
}

}  // namespace seamkit
