#pragma once

// Checkpoint container:
//   "SEAMKIT-CKPT 1\n"
//   one line of JSON holding the ModelConfig
//   u32 tensor count, then per tensor: u32 name length, name bytes,
//   u32 rows, u32 cols, rows*cols little-endian float64 (row-major).

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "toy_model.hpp"

namespace seamkit {

inline constexpr std::string_view kCheckpointMagic = "SEAMKIT-CKPT 1\n";

inline nlohmann::ordered_json config_to_json(const ModelConfig& c) {
    nlohmann::ordered_json j;
    j["tokens_per_branch"] = c.tokens_per_branch;
    j["width"] = c.width;
    j["layers"] = c.layers;
    j["heads"] = c.heads;
    j["ffn_multiplier"] = c.ffn_multiplier;
    j["fourier_bands"] = c.fourier_bands;
    j["max_segments"] = c.max_segments;
    j["freeze_geometry_encoder"] = c.freeze_geometry_encoder;
    j["seed"] = c.seed;
    return j;
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.tokens_per_branch = j.at("tokens_per_branch").get<int>();
    c.width = j.at("width").get<int>();
    c.layers = j.at("layers").get<int>();
    c.heads = j.at("heads").get<int>();
    c.ffn_multiplier = j.at("ffn_multiplier").get<int>();
    c.fourier_bands = j.at("fourier_bands").get<int>();
    c.max_segments = j.at("max_segments").get<int>();
    c.freeze_geometry_encoder = j.at("freeze_geometry_encoder").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

namespace ckpt_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }

    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::string_view line() {
        const auto end = data_.find('\n', pos_);
        if (end == std::string_view::npos) throw Error("checkpoint truncated");
        auto s = data_.substr(pos_, end - pos_);
        pos_ = end + 1;
        return s;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw Error("checkpoint truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace ckpt_detail

inline std::string save_checkpoint(const ToyModel& model) {
    using namespace ckpt_detail;
    std::string out(kCheckpointMagic);
    out += config_to_json(model.config()).dump();
    out += '\n';
    const auto& tensors = model.params().tensors;
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(m.rows()));
        put_u32(out, static_cast<std::uint32_t>(m.cols()));
        for (long i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
    }
    return out;
}

// Rejects files whose tensors do not match the shapes implied by their config.
inline ToyModel load_checkpoint(std::string_view data) {
    using namespace ckpt_detail;
    if (data.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) throw Error("not a seamkit checkpoint");
    Reader r(data.substr(kCheckpointMagic.size()));
    ModelConfig cfg;
    try {
        cfg = config_from_json(nlohmann::json::parse(r.line()));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("checkpoint config: ") + e.what());
    }
    ParameterVector params;
    const auto count = r.u32();
    for (std::uint32_t t = 0; t < count; ++t) {
        std::string name(r.bytes(r.u32()));
        const auto rows = r.u32();
        const auto cols = r.u32();
        Matrix m(rows, cols);
        for (long i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
        params.tensors.emplace(std::move(name), std::move(m));
    }
    if (!r.at_end()) throw Error("trailing bytes in checkpoint");
    return ToyModel(cfg, std::move(params));
}

}  // namespace seamkit
