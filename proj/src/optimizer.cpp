#include "uipc/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace uipc {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Adam: return "adam";
        case OptimizerKind::Adagrad: return "adagrad";
    }
    throw std::logic_error("unreachable optimizer kind");
}

OptimizerKind optimizer_from_string(std::string_view name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "adagrad") return OptimizerKind::Adagrad;
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'; valid: adam, adagrad");
}

std::unique_ptr<Optimizer> Optimizer::make(OptimizerKind kind, double learning_rate,
                                           const Model& model) {
    switch (kind) {
        case OptimizerKind::Adam: return std::make_unique<AdamOptimizer>(learning_rate, model);
        case OptimizerKind::Adagrad: return std::make_unique<AdagradOptimizer>(learning_rate, model);
    }
    throw std::logic_error("unreachable optimizer kind");
}

namespace {

void check_shapes(std::span<Matrix* const> params, const Grads& grads, const Grads& state) {
    if (params.size() != grads.size() || params.size() != state.size())
        throw std::invalid_argument("optimizer step: tensor count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state[i]))
            throw std::invalid_argument("optimizer step: shape mismatch");
}

}  // namespace

AdamOptimizer::AdamOptimizer(double learning_rate, const Model& model)
    : lr_(learning_rate), m_(model.zero_grads()), v_(model.zero_grads()) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("Adam: learning rate must be > 0");
}

void AdamOptimizer::step(std::span<Matrix* const> params, const Grads& grads) {
    check_shapes(params, grads, m_);
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, step_count_);
    const double bc2 = 1.0 - std::pow(beta2_, step_count_);
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        double* p = params[ti]->data();
        const double* g = grads[ti].data();
        double* m = m_[ti].data();
        double* v = v_[ti].data();
        for (std::size_t i = 0; i < params[ti]->size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            p[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
        }
    }
}

AdagradOptimizer::AdagradOptimizer(double learning_rate, const Model& model)
    : lr_(learning_rate), accum_(model.zero_grads()) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("Adagrad: learning rate must be > 0");
}

void AdagradOptimizer::step(std::span<Matrix* const> params, const Grads& grads) {
    check_shapes(params, grads, accum_);
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        double* p = params[ti]->data();
        const double* g = grads[ti].data();
        double* a = accum_[ti].data();
        for (std::size_t i = 0; i < params[ti]->size(); ++i) {
            a[i] += g[i] * g[i];
            if (g[i] != 0.0) p[i] -= lr_ * g[i] / (std::sqrt(a[i]) + eps_);
        }
    }
}

}  // namespace uipc
