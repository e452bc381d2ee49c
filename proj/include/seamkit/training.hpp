#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "toy_model.hpp"

namespace seamkit {

struct TrainingExample {
    const PreparedCondition* condition = nullptr;
    TokenSequence tokens;
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients gradients;
};

// Mean next-token negative log-likelihood over every predicted position in
// the batch, with gradients for all trainable parameters.
inline LossAndGradients nll_gradients(const ToyModel& model, std::span<const TrainingExample> batch) {
    if (batch.empty()) throw ContractError("empty training batch");
    ForwardPass fp(model, true);
    std::vector<ad::Var> terms;
    std::size_t predicted = 0;
    for (const auto& ex : batch) {
        terms.push_back(fp.sequence_logprob(ex.tokens, fp.encode_condition(*ex.condition)));
        predicted += ex.tokens.size() - 1;
    }
    const auto total = ad::scale(ad::sum_scalars(terms), -1.0 / static_cast<double>(predicted));
    LossAndGradients out;
    out.loss = total.scalar();
    if (!std::isfinite(out.loss)) throw TrainingError("non-finite NLL " + std::to_string(out.loss));
    fp.tape().backward(total);
    out.gradients = fp.gradients();
    return out;
}

// Adam with bias correction. Frozen parameters are skipped.
class AdamOptimizer {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void step(ToyModel& model, const Gradients& grads, double lr) {
        if (lr == 0.0) return;
        ++t_;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (const auto& [name, g] : grads) {
            if (!model.trainable(name)) continue;
            auto& p = model.params().tensors.at(name);
            auto [mit, fresh] = m_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
            auto [vit, _] = v_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
            mit->second = beta1 * mit->second + (1.0 - beta1) * g;
            vit->second = beta2 * vit->second + (1.0 - beta2) * g.cwiseProduct(g);
            p.array() -= lr * (mit->second.array() / c1) / ((vit->second.array() / c2).sqrt() + eps);
        }
    }

    long steps() const { return t_; }

private:
    long t_ = 0;
    std::map<std::string, Matrix> m_;
    std::map<std::string, Matrix> v_;
};

// Plain gradient descent; used where a single exact step matters.
inline void sgd_step(ToyModel& model, const Gradients& grads, double lr) {
    if (lr == 0.0) return;
    for (const auto& [name, g] : grads) {
        if (model.trainable(name)) model.params().tensors.at(name) -= lr * g;
    }
}

// One optimizer step on the mean next-token NLL. Returns the pre-step loss.
inline double nll_train_step(ToyModel& model, AdamOptimizer& opt, std::span<const TrainingExample> batch, double lr) {
    const auto lg = nll_gradients(model, batch);
    opt.step(model, lg.gradients, lr);
    return lg.loss;
}

}  // namespace seamkit
