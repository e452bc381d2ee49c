#pragma once

// Desk-scale conditional seam generator: two point-cloud encoders whose token
// grids are concatenated into the condition, and an hourglass causal decoder
// over the seam token stream (coordinate -> endpoint -> segment level and
// back) with cross-attention to the condition.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "error.hpp"
#include "point_sampler.hpp"
#include "rng.hpp"
#include "seam_token.hpp"

namespace seamkit {

using ad::Matrix;

struct ModelConfig {
    int tokens_per_branch = 32;  // l
    int width = 64;              // d
    int layers = 8;
    int heads = 2;
    int ffn_multiplier = 2;
    int fourier_bands = 4;
    int max_segments = 512;
    bool freeze_geometry_encoder = false;
    std::uint64_t seed = 0;

    static constexpr int coordinate_factor = 3;
    static constexpr int endpoint_factor = 2;
    static constexpr int vocab = kVocabSize;

    int max_tokens() const { return kTokensPerSegment * max_segments + 2; }
    int head_width() const { return width / heads; }
    int feature_width() const { return 3 + 6 * fourier_bands; }

    void validate() const {
        if (tokens_per_branch < 1 || width < 1 || heads < 1 || layers < 5 || ffn_multiplier < 1 ||
            fourier_bands < 0 || max_segments < 1) {
            throw ContractError("model config out of range (layers must be >= 5)");
        }
        if (width % heads != 0) throw ContractError("width must be divisible by heads");
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Full-scale dimensions; representable, not meant for desk training.
inline ModelConfig full_scale_config() {
    ModelConfig c;
    c.tokens_per_branch = 3072;
    c.width = 1024;
    c.layers = 24;
    c.heads = 16;
    c.freeze_geometry_encoder = true;
    return c;
}

// Layer layout of the decoder. Stages run in the order coordinate-pre,
// endpoint-pre, segment, endpoint-post, coordinate-post.
struct StagePlan {
    static constexpr int kStages = 5;
    std::array<int, kStages> layers{};
    // cross[g] for global layer index g in execution order.
    std::vector<bool> cross;

    static StagePlan make(int total) {
        StagePlan p;
        // Even split over the three resolution levels, coordinate level first.
        std::array<int, 3> level{total / 3, total / 3, total / 3};
        for (int r = 0; r < total % 3; ++r) ++level[r];
        p.layers = {level[0] - level[0] / 2, level[1] - level[1] / 2, level[2], level[1] / 2, level[0] / 2};
        int g = 0;
        for (int s = 0; s < kStages; ++s) {
            for (int i = 0; i < p.layers[s]; ++i, ++g) {
                // Condition enters at the first layer of every stage and on
                // every fourth layer (three self-attention, one cross).
                p.cross.push_back(i == 0 || g % 4 == 3);
            }
        }
        return p;
    }
};

// Named trainable tensors. Names are stable across runs and builds.
struct ParameterVector {
    enum class Role { policy, reference };
    std::map<std::string, Matrix> tensors;
    Role role = Role::policy;

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& [_, m] : tensors) n += static_cast<std::size_t>(m.size());
        return n;
    }

    bool same_layout(const ParameterVector& o) const {
        if (tensors.size() != o.tensors.size()) return false;
        auto it = o.tensors.begin();
        for (const auto& [name, m] : tensors) {
            if (it->first != name || it->second.rows() != m.rows() || it->second.cols() != m.cols()) return false;
            ++it;
        }
        return true;
    }
};

using Gradients = std::map<std::string, Matrix>;

class ToyModel {
public:
    ToyModel() = default;

    explicit ToyModel(const ModelConfig& config) : config_(config) {
        config_.validate();
        initialize();
    }

    ToyModel(const ModelConfig& config, ParameterVector params) : config_(config), params_(std::move(params)) {
        config_.validate();
        ToyModel fresh(config_);
        if (!fresh.params_.same_layout(params_)) {
            throw ContractError("parameter shapes do not match the model config");
        }
    }

    const ModelConfig& config() const { return config_; }
    const ParameterVector& params() const { return params_; }
    ParameterVector& params() { return params_; }

    bool trainable(const std::string& name) const {
        return !(config_.freeze_geometry_encoder && name.rfind("enc_geom.", 0) == 0);
    }

    const StagePlan& plan() const {
        if (!plan_) plan_ = StagePlan::make(config_.layers);
        return *plan_;
    }

private:
    void add(const std::string& name, long rows, long cols, double stddev, Rng& rng, double constant = 0.0) {
        Matrix m(rows, cols);
        for (long i = 0; i < m.size(); ++i) m.data()[i] = stddev > 0.0 ? stddev * rng.normal() : constant;
        params_.tensors.emplace(name, std::move(m));
    }

    void add_norm(const std::string& name, Rng& rng) {
        add(name + ".g", 1, config_.width, 0.0, rng, 1.0);
        add(name + ".b", 1, config_.width, 0.0, rng, 0.0);
    }

    void add_attention(const std::string& name, Rng& rng) {
        const long d = config_.width;
        const double s = 1.0 / std::sqrt(static_cast<double>(d));
        for (const char* p : {"q", "k", "v"}) {
            add(name + ".w" + p, d, d, s, rng);
            add(name + ".b" + p, 1, d, 0.0, rng);
        }
        add(name + ".wo", d, d, 0.5 * s, rng);
        add(name + ".bo", 1, d, 0.0, rng);
    }

    void add_ffn(const std::string& name, Rng& rng) {
        const long d = config_.width;
        const long h = d * config_.ffn_multiplier;
        add(name + ".w1", d, h, 1.0 / std::sqrt(static_cast<double>(d)), rng);
        add(name + ".b1", 1, h, 0.0, rng);
        add(name + ".w2", h, d, 0.5 / std::sqrt(static_cast<double>(h)), rng);
        add(name + ".b2", 1, d, 0.0, rng);
    }

    void initialize() {
        Rng rng(config_.seed);
        const long d = config_.width;
        for (const char* branch : {"enc_topo", "enc_geom"}) {
            const std::string b = branch;
            add(b + ".embed.w", config_.feature_width(), d, 1.0 / std::sqrt(config_.feature_width()), rng);
            add(b + ".embed.b", 1, d, 0.0, rng);
            add_norm(b + ".ln_q", rng);
            add_norm(b + ".ln_kv", rng);
            add_attention(b + ".attn", rng);
            add_norm(b + ".ln_ffn", rng);
            add_ffn(b + ".ffn", rng);
            add_norm(b + ".ln_out", rng);
        }
        add("dec.tok_emb", ModelConfig::vocab, d, 0.5, rng);
        add("dec.slot_emb", kTokensPerSegment + 1, d, 0.5, rng);
        // Marks which encoder a condition token came from; without it the
        // cross-attention could not tell the two halves apart.
        add("dec.cond_type", 2, d, 0.5, rng);
        const auto& p = plan();
        for (std::size_t g = 0; g < p.cross.size(); ++g) {
            const std::string name = "dec.layer" + two_digits(g);
            add_norm(name + ".ln_self", rng);
            add_attention(name + ".self", rng);
            if (p.cross[g]) {
                add_norm(name + ".ln_cross", rng);
                add_attention(name + ".cross", rng);
            }
            add_norm(name + ".ln_ffn", rng);
            add_ffn(name + ".ffn", rng);
        }
        add_norm("dec.ln_final", rng);
        add("dec.head.w", d, ModelConfig::vocab, 0.02, rng);
        add("dec.head.b", 1, ModelConfig::vocab, 0.0, rng);
    }

public:
    static std::string two_digits(std::size_t g) { return (g < 10 ? "0" : "") + std::to_string(g); }

private:
    ModelConfig config_;
    ParameterVector params_;
    mutable std::optional<StagePlan> plan_;
};

// Per-branch inputs that do not depend on parameters: Fourier features of the
// whole cloud and of its FPS anchors.
struct PreparedBranch {
    Matrix features;
    Matrix anchor_features;
};

struct PreparedCondition {
    PreparedBranch topo;
    PreparedBranch geom;
};

inline Matrix fourier_features(const std::vector<Vec3>& points, int bands) {
    Matrix f(static_cast<long>(points.size()), 3 + 6 * bands);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const long r = static_cast<long>(i);
        for (int a = 0; a < 3; ++a) f(r, a) = points[i][a];
        for (int k = 0; k < bands; ++k) {
            const double w = M_PI * std::pow(2.0, k);
            for (int a = 0; a < 3; ++a) {
                f(r, 3 + 6 * k + a) = std::sin(w * points[i][a]);
                f(r, 3 + 6 * k + 3 + a) = std::cos(w * points[i][a]);
            }
        }
    }
    return f;
}

inline PreparedCondition prepare_condition(const ConditioningClouds& clouds, const ModelConfig& cfg) {
    const auto l = static_cast<std::size_t>(cfg.tokens_per_branch);
    auto branch = [&](const PointCloud& pts, const char* which) {
        if (pts.size() < l) {
            throw ContractError(std::string(which) + " cloud has " + std::to_string(pts.size()) +
                                " points, need at least " + std::to_string(l));
        }
        PreparedBranch b;
        b.features = fourier_features(pts, cfg.fourier_bands);
        const auto anchors = fps_anchors(pts, l);
        b.anchor_features.resize(static_cast<long>(l), b.features.cols());
        for (std::size_t i = 0; i < l; ++i) b.anchor_features.row(static_cast<long>(i)) = b.features.row(static_cast<long>(anchors[i]));
        return b;
    };
    return {branch(clouds.topo_points, "topology"), branch(clouds.geom_points, "geometry")};
}

inline Matrix sinusoidal_positions(long n, long d) {
    Matrix p(n, d);
    for (long i = 0; i < n; ++i) {
        for (long k = 0; k < d; ++k) {
            const double freq = std::pow(10000.0, -static_cast<double>(2 * (k / 2)) / static_cast<double>(d));
            p(i, k) = (k % 2 == 0) ? std::sin(i * freq) : std::cos(i * freq);
        }
    }
    return p;
}

// Sizes of the three decoder resolutions for a sequence of n tokens.
struct HourglassLengths {
    long coordinate = 0;
    long endpoint = 0;
    long segment = 0;
};

inline HourglassLengths hourglass_lengths(long n) {
    HourglassLengths h;
    h.coordinate = n;
    h.endpoint = ad::pooled_length(n, ModelConfig::coordinate_factor);
    h.segment = ad::pooled_length(h.endpoint, ModelConfig::endpoint_factor);
    return h;
}

// One forward pass on a tape. Parameters become leaves on first use.
class ForwardPass {
public:
    ForwardPass(const ToyModel& model, bool with_grad) : model_(model), with_grad_(with_grad) {}

    ad::Tape& tape() { return tape_; }

    ad::Var param(const std::string& name) {
        auto it = leaves_.find(name);
        if (it != leaves_.end()) return it->second;
        const auto& tensors = model_.params().tensors;
        auto p = tensors.find(name);
        if (p == tensors.end()) throw ContractError("unknown parameter " + name);
        auto v = tape_.leaf(p->second, with_grad_ && model_.trainable(name));
        leaves_.emplace(name, v);
        return v;
    }

    // Gradient of every parameter that took part in the pass.
    Gradients gradients() {
        Gradients g;
        for (const auto& [name, v] : leaves_) {
            if (tape_.has_grad(v.id())) g.emplace(name, tape_.grad(v.id()));
        }
        return g;
    }

    ad::Var linear(ad::Var x, const std::string& name) {
        return ad::add_row(ad::matmul(x, param(name + ".w")), param(name + ".b"));
    }

    ad::Var norm(ad::Var x, const std::string& name) {
        return ad::layer_norm(x, param(name + ".g"), param(name + ".b"));
    }

    ad::Var attention(ad::Var xq, ad::Var xkv, const std::string& name, bool causal) {
        const auto& cfg = model_.config();
        auto proj = [&](ad::Var x, const char* p) {
            return ad::add_row(ad::matmul(x, param(name + ".w" + p)), param(name + ".b" + p));
        };
        const ad::Var q = proj(xq, "q");
        const ad::Var k = proj(xkv, "k");
        const ad::Var v = proj(xkv, "v");
        const long dh = cfg.head_width();
        const double s = 1.0 / std::sqrt(static_cast<double>(dh));
        std::vector<ad::Var> heads;
        for (long h = 0; h < cfg.heads; ++h) {
            const auto qh = ad::slice_cols(q, h * dh, dh);
            const auto kh = ad::slice_cols(k, h * dh, dh);
            const auto vh = ad::slice_cols(v, h * dh, dh);
            const auto p = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), s), causal);
            heads.push_back(ad::matmul(p, vh));
        }
        const ad::Var o = heads.size() == 1 ? heads.front() : ad::concat_cols(heads);
        return ad::add_row(ad::matmul(o, param(name + ".wo")), param(name + ".bo"));
    }

    ad::Var ffn(ad::Var x, const std::string& name) {
        const auto h = ad::gelu(ad::add_row(ad::matmul(x, param(name + ".w1")), param(name + ".b1")));
        return ad::add_row(ad::matmul(h, param(name + ".w2")), param(name + ".b2"));
    }

    ad::Var encode_branch(const PreparedBranch& b, const std::string& name) {
        const auto kv = linear(tape_.constant(b.features), name + ".embed");
        const auto q = linear(tape_.constant(b.anchor_features), name + ".embed");
        auto x = ad::add(q, attention(norm(q, name + ".ln_q"), norm(kv, name + ".ln_kv"), name + ".attn", false));
        x = ad::add(x, ffn(norm(x, name + ".ln_ffn"), name + ".ffn"));
        return norm(x, name + ".ln_out");
    }

    // (2l) x d condition: topology tokens, then geometry tokens.
    ad::Var encode_condition(const PreparedCondition& cond) {
        auto it = cond_cache_.find(&cond);
        if (it != cond_cache_.end()) return it->second;
        const auto e = ad::concat_rows({encode_branch(cond.topo, "enc_topo"), encode_branch(cond.geom, "enc_geom")});
        cond_cache_.emplace(&cond, e);
        return e;
    }

    ad::Var decoder_layer(ad::Var x, ad::Var cond, std::size_t g, bool cross) {
        const std::string name = "dec.layer" + ToyModel::two_digits(g);
        auto h = norm(x, name + ".ln_self");
        x = ad::add(x, attention(h, h, name + ".self", true));
        if (cross) x = ad::add(x, attention(norm(x, name + ".ln_cross"), cond, name + ".cross", false));
        return ad::add(x, ffn(norm(x, name + ".ln_ffn"), name + ".ffn"));
    }

    // Logits (n x vocab); row i scores the token at position i + 1.
    ad::Var decoder_logits(const TokenSequence& tokens, ad::Var cond) {
        const auto& cfg = model_.config();
        if (tokens.empty()) throw ContractError("decoder needs at least the BOS token");
        if (cond.rows() != 2 * cfg.tokens_per_branch || cond.cols() != cfg.width) {
            throw ContractError("condition must be (2l) x d");
        }
        std::vector<int> ids, slots;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i] < 0 || tokens[i] >= ModelConfig::vocab) {
                throw RangeError("token " + std::to_string(tokens[i]) + " at position " + std::to_string(i) +
                                 " outside vocabulary");
            }
            ids.push_back(tokens[i]);
            slots.push_back(i == 0 ? kTokensPerSegment : static_cast<int>((i - 1) % kTokensPerSegment));
        }
        const long n = static_cast<long>(tokens.size());
        std::vector<int> branch(static_cast<std::size_t>(cond.rows()), 0);
        std::fill(branch.begin() + cfg.tokens_per_branch, branch.end(), 1);
        cond = ad::add(cond, ad::gather_rows(param("dec.cond_type"), std::move(branch)));
        ad::Var x = ad::add(ad::gather_rows(param("dec.tok_emb"), ids), ad::gather_rows(param("dec.slot_emb"), slots));
        x = ad::add(x, tape_.constant(sinusoidal_positions(n, cfg.width)));

        const auto& plan = model_.plan();
        const auto lens = hourglass_lengths(n);
        std::size_t g = 0;
        auto run_stage = [&](ad::Var h, int stage) {
            for (int i = 0; i < plan.layers[stage]; ++i, ++g) h = decoder_layer(h, cond, g, plan.cross[g]);
            return h;
        };
        const auto coord_pre = run_stage(x, 0);
        auto endpoint = ad::shift_pool(coord_pre, ModelConfig::coordinate_factor);
        const auto endpoint_pre = run_stage(endpoint, 1);
        auto segment = ad::shift_pool(endpoint_pre, ModelConfig::endpoint_factor);
        segment = run_stage(segment, 2);
        endpoint = ad::add(endpoint_pre, ad::repeat_rows(segment, ModelConfig::endpoint_factor, lens.endpoint));
        endpoint = run_stage(endpoint, 3);
        auto coord = ad::add(coord_pre, ad::repeat_rows(endpoint, ModelConfig::coordinate_factor, lens.coordinate));
        coord = run_stage(coord, 4);
        last_lengths_ = {coord.rows(), endpoint.rows(), segment.rows()};
        return linear(norm(coord, "dec.ln_final"), "dec.head");
    }

    // log pi(tokens | cond): sum of next-token log-probabilities.
    ad::Var sequence_logprob(const TokenSequence& tokens, ad::Var cond) {
        if (tokens.size() < 2 || tokens.front() != kBos || tokens.back() != kEos) {
            throw ContractError("sequence_logprob needs a complete BOS..EOS sequence");
        }
        const auto logits = decoder_logits(tokens, cond);
        std::vector<int> targets(tokens.begin() + 1, tokens.end());
        return ad::sum_log_prob(logits, std::move(targets));
    }

    const HourglassLengths& last_lengths() const { return last_lengths_; }

private:
    const ToyModel& model_;
    bool with_grad_;
    ad::Tape tape_;
    std::map<std::string, ad::Var> leaves_;
    std::map<const PreparedCondition*, ad::Var> cond_cache_;
    HourglassLengths last_lengths_;
};

// Convenience wrappers without gradients.

inline Matrix encode_condition(const ToyModel& model, const PreparedCondition& cond) {
    ForwardPass fp(model, false);
    return fp.encode_condition(cond).value();
}

inline Matrix decoder_logits(const ToyModel& model, const TokenSequence& tokens, const Matrix& cond) {
    ForwardPass fp(model, false);
    return fp.decoder_logits(tokens, fp.tape().constant(cond)).value();
}

inline double sequence_logprob(const ToyModel& model, const TokenSequence& tokens, const PreparedCondition& cond) {
    ForwardPass fp(model, false);
    return fp.sequence_logprob(tokens, fp.encode_condition(cond)).scalar();
}

inline double sequence_logprob(const ToyModel& model, const TokenSequence& tokens, const Matrix& cond) {
    ForwardPass fp(model, false);
    return fp.sequence_logprob(tokens, fp.tape().constant(cond)).scalar();
}

// ---------------------------------------------------------------------------
// Sampling

struct SamplingOptions {
    double temperature = 1.0;
    double top_p = 1.0;
    std::uint64_t seed = 0;
    int max_segments = 0;  // 0: use the model's cap
};

struct SampleResult {
    TokenSequence tokens;
    // Untempered log-probability of each generated token given its prefix.
    std::vector<double> step_logprobs;
    bool malformed = false;
};

// Draws one index from softmax(logits / temperature) restricted to the
// smallest top-probability set whose mass reaches top_p.
inline int sample_next(const Eigen::Ref<const Eigen::RowVectorXd>& logits, double temperature, double top_p, Rng& rng) {
    if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ContractError("top_p must lie in (0, 1]");
    const long v = logits.size();
    const double mx = logits.maxCoeff();
    std::vector<double> p(static_cast<std::size_t>(v));
    double sum = 0.0;
    for (long i = 0; i < v; ++i) {
        p[i] = std::exp((logits[i] - mx) / temperature);
        sum += p[i];
    }
    std::vector<int> order(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
    double kept = 0.0;
    std::size_t count = 0;
    while (count < order.size()) {
        kept += p[order[count]];
        ++count;
        if (kept >= top_p * sum) break;
    }
    double target = rng.uniform() * kept;
    for (std::size_t i = 0; i < count; ++i) {
        target -= p[order[i]];
        if (target < 0.0) return order[i];
    }
    return order[count - 1];
}

inline double log_softmax_at(const Eigen::Ref<const Eigen::RowVectorXd>& logits, int index) {
    const double mx = logits.maxCoeff();
    return logits[index] - mx - std::log((logits.array() - mx).exp().sum());
}

// Autoregressive sampling until EOS or the length cap. A sequence that stops
// mid-segment, emits a non-coordinate token or hits the cap is repaired by
// truncating to its last complete segment and flagged malformed.
inline SampleResult sample(const ToyModel& model, const Matrix& cond, const SamplingOptions& opt) {
    const int max_segments = opt.max_segments > 0 ? opt.max_segments : model.config().max_segments;
    const std::size_t cap = static_cast<std::size_t>(kTokensPerSegment * max_segments + 2);
    Rng rng(opt.seed);
    SampleResult out;
    out.tokens.push_back(kBos);
    bool terminated = false;
    while (out.tokens.size() < cap) {
        const Matrix logits = decoder_logits(model, out.tokens, cond);
        const Eigen::RowVectorXd last = logits.row(logits.rows() - 1);
        const int next = sample_next(last, opt.temperature, opt.top_p, rng);
        out.step_logprobs.push_back(log_softmax_at(last, next));
        out.tokens.push_back(next);
        if (next == kEos) {
            terminated = true;
            break;
        }
        if (next >= kCoordBins) break;
    }
    const bool repaired = repair_sequence(out.tokens);
    out.malformed = repaired || !terminated;
    return out;
}

}  // namespace seamkit
