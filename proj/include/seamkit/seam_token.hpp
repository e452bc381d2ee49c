#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"

namespace seamkit {

inline constexpr int kCoordBins = 1024;
inline constexpr int kBos = 1024;
inline constexpr int kEos = 1025;
inline constexpr int kPad = 1026;
inline constexpr int kVocabSize = 1027;
inline constexpr int kTokensPerSegment = 6;
inline constexpr double kHalfBin = 0.5 / kCoordBins;
inline constexpr double kCubeTolerance = 1e-9;

using Token = std::int32_t;
using TokenSequence = std::vector<Token>;

struct SeamSegment {
    Vec3 p1;
    Vec3 p2;

    friend bool operator==(const SeamSegment& a, const SeamSegment& b) {
        return a.p1 == b.p1 && a.p2 == b.p2;
    }
};

using SeamSet = std::vector<SeamSegment>;

// Bin of a canonical-cube coordinate: floor((c + 0.5) * 1024) clamped to
// [0, 1023]. Values up to 1e-9 outside the cube are clamped.
inline int quantize(double coord) {
    if (!(coord >= -0.5 - kCubeTolerance && coord <= 0.5 + kCubeTolerance)) {
        throw RangeError("coordinate " + std::to_string(coord) + " outside canonical cube");
    }
    const double scaled = std::floor((coord + 0.5) * kCoordBins);
    return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(kCoordBins - 1)));
}

inline double dequantize(int bin) { return (bin + 0.5) / kCoordBins - 0.5; }

// Sort key of an endpoint: quantized (y, z, x). Vertical axis first.
using YzxKey = std::array<int, 3>;

inline YzxKey yzx_key(const Vec3& p) { return {quantize(p.y()), quantize(p.z()), quantize(p.x())}; }

inline Vec3 from_yzx_key(const YzxKey& k) {
    return {dequantize(k[2]), dequantize(k[0]), dequantize(k[1])};
}

// Orders endpoints within each segment and segments by (first, second)
// endpoint key. Zero-length and duplicate segments (on the quantized
// lattice) are dropped. Ties on the lattice fall back to the raw float
// coordinates so the output does not depend on input order.
inline SeamSet canonicalize(const SeamSet& seams) {
    struct Keyed {
        YzxKey k1, k2;
        SeamSegment seg;
    };
    auto raw = [](const Vec3& p) { return std::tuple(p.y(), p.z(), p.x()); };

    std::vector<Keyed> items;
    items.reserve(seams.size());
    for (const auto& s : seams) {
        Keyed it{yzx_key(s.p1), yzx_key(s.p2), s};
        if (it.k1 == it.k2) continue;
        if (it.k2 < it.k1) {
            std::swap(it.k1, it.k2);
            std::swap(it.seg.p1, it.seg.p2);
        }
        items.push_back(std::move(it));
    }
    std::sort(items.begin(), items.end(), [&](const Keyed& a, const Keyed& b) {
        if (a.k1 != b.k1) return a.k1 < b.k1;
        if (a.k2 != b.k2) return a.k2 < b.k2;
        if (raw(a.seg.p1) != raw(b.seg.p1)) return raw(a.seg.p1) < raw(b.seg.p1);
        return raw(a.seg.p2) < raw(b.seg.p2);
    });
    SeamSet out;
    out.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0 && items[i].k1 == items[i - 1].k1 && items[i].k2 == items[i - 1].k2) continue;
        out.push_back(items[i].seg);
    }
    return out;
}

inline bool is_canonical(const SeamSet& seams) {
    for (std::size_t i = 0; i < seams.size(); ++i) {
        const auto a1 = yzx_key(seams[i].p1);
        const auto a2 = yzx_key(seams[i].p2);
        if (!(a1 < a2)) return false;
        if (i > 0) {
            const auto b1 = yzx_key(seams[i - 1].p1);
            const auto b2 = yzx_key(seams[i - 1].p2);
            if (!(std::tie(b1, b2) < std::tie(a1, a2))) return false;
        }
    }
    return true;
}

// BOS, then (y1 z1 x1 y2 z2 x2) per segment, then EOS.
inline TokenSequence encode(const SeamSet& seams) {
    if (!is_canonical(seams)) throw ContractError("encode requires a canonical seam set");
    TokenSequence out;
    out.reserve(2 + kTokensPerSegment * seams.size());
    out.push_back(kBos);
    for (const auto& s : seams) {
        for (const auto& p : {s.p1, s.p2}) {
            for (int b : yzx_key(p)) out.push_back(b);
        }
    }
    out.push_back(kEos);
    return out;
}

// Inverse of encode. Endpoints land on bin centers; the result is
// canonicalized. Trailing PAD tokens after EOS are accepted.
inline SeamSet decode(const TokenSequence& tokens) {
    if (tokens.empty() || tokens[0] != kBos) throw MalformedSequenceError(0, "expected BOS");
    SeamSet raw;
    std::size_t pos = 1;
    bool terminated = false;
    while (pos < tokens.size()) {
        const Token t = tokens[pos];
        if (t == kEos) {
            if ((pos - 1) % kTokensPerSegment != 0) {
                throw MalformedSequenceError(pos, "EOS inside a segment");
            }
            terminated = true;
            ++pos;
            break;
        }
        if (t < 0 || t >= kCoordBins) {
            throw MalformedSequenceError(pos, "token " + std::to_string(t) + " is not a coordinate");
        }
        ++pos;
    }
    if (!terminated) throw MalformedSequenceError(tokens.size(), "missing EOS");
    for (std::size_t p = pos; p < tokens.size(); ++p) {
        if (tokens[p] != kPad) throw MalformedSequenceError(p, "token after EOS");
    }
    const std::size_t body_end = pos - 1;
    for (std::size_t i = 1; i + kTokensPerSegment <= body_end; i += kTokensPerSegment) {
        const YzxKey k1{tokens[i], tokens[i + 1], tokens[i + 2]};
        const YzxKey k2{tokens[i + 3], tokens[i + 4], tokens[i + 5]};
        raw.push_back({from_yzx_key(k1), from_yzx_key(k2)});
    }
    return canonicalize(raw);
}

// Keeps the longest well-formed prefix of a generated sequence: everything up
// to the last complete segment before the first EOS or non-coordinate token.
// Returns true when the input needed repair.
inline bool repair_sequence(TokenSequence& tokens) {
    std::size_t complete = 0;
    bool clean = !tokens.empty() && tokens[0] == kBos;
    std::size_t pos = 1;
    for (; pos < tokens.size(); ++pos) {
        const Token t = tokens[pos];
        if (t < 0 || t >= kCoordBins) break;
        if ((pos % kTokensPerSegment) == 0) complete = pos / kTokensPerSegment;
    }
    const bool eos_at_boundary =
        pos < tokens.size() && tokens[pos] == kEos && (pos - 1) % kTokensPerSegment == 0;
    clean = clean && eos_at_boundary && pos + 1 == tokens.size();
    TokenSequence fixed;
    fixed.reserve(2 + complete * kTokensPerSegment);
    fixed.push_back(kBos);
    if (!tokens.empty() && tokens[0] == kBos) {
        fixed.insert(fixed.end(), tokens.begin() + 1,
                     tokens.begin() + 1 + static_cast<std::ptrdiff_t>(complete * kTokensPerSegment));
    }
    fixed.push_back(kEos);
    tokens = std::move(fixed);
    return !clean;
}

}  // namespace seamkit
