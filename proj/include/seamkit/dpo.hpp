#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "seam_eval.hpp"
#include "seam_token.hpp"
#include "toy_model.hpp"
#include "training.hpp"

namespace seamkit {

enum class PairingMode { joint, distortion_only, density_only };

inline std::string to_string(PairingMode m) {
    switch (m) {
        case PairingMode::joint: return "joint";
        case PairingMode::distortion_only: return "distortion-only";
        case PairingMode::density_only: return "density-only";
    }
    return "joint";
}

inline PairingMode parse_pairing_mode(const std::string& s) {
    if (s == "joint") return PairingMode::joint;
    if (s == "distortion-only") return PairingMode::distortion_only;
    if (s == "density-only") return PairingMode::density_only;
    throw ContractError("unknown pairing mode '" + s + "'");
}

// True when a is preferred over b under the given gate. Both comparisons
// are strict.
inline bool prefers(const SeamMetrics& a, const SeamMetrics& b, PairingMode mode) {
    switch (mode) {
        case PairingMode::joint: return a.distortion < b.distortion && a.fragments < b.fragments;
        case PairingMode::distortion_only: return a.distortion < b.distortion;
        case PairingMode::density_only: return a.fragments < b.fragments;
    }
    return false;
}

struct PairIndex {
    std::size_t positive = 0;
    std::size_t negative = 0;
    friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

// Every ordered (i, j), i != j, with candidate i preferred over candidate j.
inline std::vector<PairIndex> build_pairs(std::span<const SeamMetrics> candidates, PairingMode mode) {
    if (candidates.size() < 2) throw ContractError("build_pairs needs at least two candidates");
    std::vector<PairIndex> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (i != j && prefers(candidates[i], candidates[j], mode)) out.push_back({i, j});
        }
    }
    return out;
}

struct PreferencePair {
    const PreparedCondition* condition = nullptr;
    SeamSet positive;
    SeamMetrics positive_metrics;
    SeamSet negative;
    SeamMetrics negative_metrics;
};

// -log sigmoid(beta * (delta_pos - delta_neg)) where each delta is a
// policy-minus-reference sequence log-probability.
inline double dpo_pair_loss(double beta, double delta_pos, double delta_neg) {
    return ad::neg_log_sigmoid(beta * (delta_pos - delta_neg));
}

// Tokenized pair with the frozen reference log-probabilities attached.
struct DpoExample {
    const PreparedCondition* condition = nullptr;
    TokenSequence positive;
    TokenSequence negative;
    double ref_positive = 0.0;
    double ref_negative = 0.0;
};

inline DpoExample make_dpo_example(const ToyModel& reference, const PreferencePair& pair) {
    DpoExample ex;
    ex.condition = pair.condition;
    ex.positive = encode(canonicalize(pair.positive));
    ex.negative = encode(canonicalize(pair.negative));
    ForwardPass fp(reference, false);
    const auto cond = fp.encode_condition(*pair.condition);
    ex.ref_positive = fp.sequence_logprob(ex.positive, cond).scalar();
    ex.ref_negative = fp.sequence_logprob(ex.negative, cond).scalar();
    if (!std::isfinite(ex.ref_positive) || !std::isfinite(ex.ref_negative)) {
        throw Error("reference log-probability is not finite");
    }
    return ex;
}

struct DpoStepResult {
    double loss = 0.0;
    double accuracy = 0.0;  // fraction of pairs with delta_pos > delta_neg
    std::vector<double> margins;  // delta_pos - delta_neg per pair
    Gradients gradients;
};

// Batch-mean DPO loss of the policy, optionally with gradients.
inline DpoStepResult dpo_evaluate(const ToyModel& policy, std::span<const DpoExample> batch, double beta,
                                  bool with_grad) {
    if (!(beta > 0.0)) throw ContractError("beta must be positive");
    DpoStepResult out;
    if (batch.empty()) return out;
    ForwardPass fp(policy, with_grad);
    std::vector<ad::Var> terms;
    std::size_t wins = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& ex = batch[i];
        const auto cond = fp.encode_condition(*ex.condition);
        const auto lp_pos = fp.sequence_logprob(ex.positive, cond);
        const auto lp_neg = fp.sequence_logprob(ex.negative, cond);
        if (!std::isfinite(lp_pos.scalar()) || !std::isfinite(lp_neg.scalar())) {
            throw Error("pair " + std::to_string(i) + ": non-finite log-probability");
        }
        const double ref_margin = ex.ref_positive - ex.ref_negative;
        // beta * ((lp_pos - ref_pos) - (lp_neg - ref_neg))
        auto z = ad::scale(ad::sub(lp_pos, lp_neg), beta);
        Matrix shift(1, 1);
        shift(0, 0) = -beta * ref_margin;
        z = ad::add(z, fp.tape().constant(shift));
        const double margin = lp_pos.scalar() - lp_neg.scalar() - ref_margin;
        out.margins.push_back(margin);
        if (margin > 0.0) ++wins;
        terms.push_back(ad::neg_log_sigmoid(z));
    }
    const auto loss = ad::scale(ad::sum_scalars(terms), 1.0 / static_cast<double>(batch.size()));
    out.loss = loss.scalar();
    out.accuracy = static_cast<double>(wins) / static_cast<double>(batch.size());
    if (with_grad) {
        fp.tape().backward(loss);
        out.gradients = fp.gradients();
    }
    return out;
}

// Convenience: reference log-probabilities computed on the fly.
inline double dpo_loss(const ToyModel& policy, const ToyModel& reference, std::span<const PreferencePair> pairs,
                       double beta) {
    std::vector<DpoExample> batch;
    for (const auto& p : pairs) batch.push_back(make_dpo_example(reference, p));
    return dpo_evaluate(policy, batch, beta, false).loss;
}

struct DpoConfig {
    double beta = 0.1;
    double learning_rate = 1e-6;
    int steps = 2500;
    PairingMode pairing = PairingMode::joint;
    bool use_adam = true;
};

struct DpoLogEntry {
    int step = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct DpoReport {
    std::vector<DpoLogEntry> log;
    double final_loss = std::numbers::ln2;
    double final_accuracy = 0.0;
};

// Full-batch DPO on a fixed dataset. The reference only supplies the frozen
// log-probabilities; it is never written to. Aborts when the loss stays above
// 10 ln 2 for 100 consecutive steps.
inline DpoReport dpo_train(ToyModel& policy, const ToyModel& reference, std::span<const PreferencePair> dataset,
                           const DpoConfig& config, const std::function<void(const DpoLogEntry&)>& on_step = {}) {
    if (!(config.beta > 0.0)) throw ContractError("beta must be positive");
    DpoReport report;
    if (dataset.empty() || config.steps <= 0) return report;
    if (!policy.params().same_layout(reference.params())) {
        throw ContractError("policy and reference layouts differ");
    }
    std::vector<DpoExample> batch;
    batch.reserve(dataset.size());
    for (const auto& p : dataset) batch.push_back(make_dpo_example(reference, p));

    AdamOptimizer adam;
    int above = 0;
    for (int step = 0; step < config.steps; ++step) {
        auto r = dpo_evaluate(policy, batch, config.beta, true);
        const DpoLogEntry entry{step, r.loss, r.accuracy};
        report.log.push_back(entry);
        if (on_step) on_step(entry);
        above = r.loss > 10.0 * std::numbers::ln2 ? above + 1 : 0;
        if (above >= 100) {
            throw TrainingError("DPO diverged: loss " + std::to_string(r.loss) + " above 10 ln 2 for 100 steps");
        }
        if (config.use_adam) {
            adam.step(policy, r.gradients, config.learning_rate);
        } else {
            sgd_step(policy, r.gradients, config.learning_rate);
        }
    }
    const auto final_eval = dpo_evaluate(policy, batch, config.beta, false);
    report.final_loss = final_eval.loss;
    report.final_accuracy = final_eval.accuracy;
    return report;
}

}  // namespace seamkit
