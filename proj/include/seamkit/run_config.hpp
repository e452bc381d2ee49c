#pragma once

// Run configuration for the pipeline commands: one "key = value" per line,
// '#' starts a comment, no nesting. Keys a command does not know are errors.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "toy_model.hpp"

namespace seamkit {

namespace config_detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("key '" + key + "': cannot parse '" + v + "'");
    }
    return out;
}

}  // namespace config_detail

class RunConfig {
public:
    RunConfig() = default;

    static RunConfig parse(std::string_view text) {
        RunConfig c;
        std::size_t pos = 0, line = 0;
        while (pos < text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            auto s = text.substr(pos, end - pos);
            pos = end + 1;
            ++line;
            if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
            s = config_detail::trim(s);
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
            const std::string key(config_detail::trim(s.substr(0, eq)));
            const std::string value(config_detail::trim(s.substr(eq + 1)));
            if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
            if (!c.values_.emplace(key, value).second) {
                throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
            }
        }
        return c;
    }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    // Throws listing every key outside the allowed set.
    void require_known(const std::vector<std::string>& allowed) const {
        std::string unknown;
        for (const auto& [k, _] : values_) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
                unknown += unknown.empty() ? k : ", " + k;
            }
        }
        if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
    }

    std::string get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }

    long get_int(const std::string& key, long fallback) const {
        return has(key) ? config_detail::parse_number<long>(key, get(key)) : fallback;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? config_detail::parse_number<std::uint64_t>(key, get(key)) : fallback;
    }

    double get_double(const std::string& key, double fallback) const {
        return has(key) ? config_detail::parse_number<double>(key, get(key)) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto v = get(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
    }

    // Comma-separated list; empty entries are dropped.
    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        const std::string all = get(key);
        std::string_view v = all;
        while (!v.empty()) {
            const auto comma = v.find(',');
            const auto item = config_detail::trim(v.substr(0, comma));
            if (!item.empty()) out.emplace_back(item);
            if (comma == std::string_view::npos) break;
            v = v.substr(comma + 1);
        }
        return out;
    }

    // Sorted "key=value" lines; the basis of the config hash.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
        return out;
    }

    // 64-bit FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

private:
    std::map<std::string, std::string> values_;
};

inline const std::vector<std::string>& model_config_keys() {
    static const std::vector<std::string> keys{"tokens_per_branch", "width",        "layers",
                                               "heads",             "ffn_multiplier", "fourier_bands",
                                               "max_segments",      "freeze_geometry_encoder", "model_seed"};
    return keys;
}

inline ModelConfig model_config_from(const RunConfig& rc) {
    ModelConfig c;
    c.tokens_per_branch = static_cast<int>(rc.get_int("tokens_per_branch", c.tokens_per_branch));
    c.width = static_cast<int>(rc.get_int("width", c.width));
    c.layers = static_cast<int>(rc.get_int("layers", c.layers));
    c.heads = static_cast<int>(rc.get_int("heads", c.heads));
    c.ffn_multiplier = static_cast<int>(rc.get_int("ffn_multiplier", c.ffn_multiplier));
    c.fourier_bands = static_cast<int>(rc.get_int("fourier_bands", c.fourier_bands));
    c.max_segments = static_cast<int>(rc.get_int("max_segments", c.max_segments));
    c.freeze_geometry_encoder = rc.get_bool("freeze_geometry_encoder", c.freeze_geometry_encoder);
    c.seed = rc.get_u64("model_seed", c.seed);
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

// What a command read, wrote and how long each stage took.
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, double>> timings;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["inputs"] = inputs;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        j["outputs"] = outputs;
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (const auto& [stage, s] : timings) t[stage] = s;
        j["timings_s"] = t;
        return j;
    }
};

}  // namespace seamkit
