#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "uipc/model.hpp"

namespace uipc {

enum class OptimizerKind { Adam, Adagrad };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(std::span<Matrix* const> params, const Grads& grads) = 0;

    static std::unique_ptr<Optimizer> make(OptimizerKind kind, double learning_rate,
                                           const Model& model);
};

// Standard Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
class AdamOptimizer final : public Optimizer {
public:
    AdamOptimizer(double learning_rate, const Model& model);
    void step(std::span<Matrix* const> params, const Grads& grads) override;

private:
    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long step_count_ = 0;
    Grads m_, v_;
};

// Accumulate-and-scale Adagrad; eps = 1e-10.
class AdagradOptimizer final : public Optimizer {
public:
    AdagradOptimizer(double learning_rate, const Model& model);
    void step(std::span<Matrix* const> params, const Grads& grads) override;

private:
    double lr_;
    double eps_ = 1e-10;
    Grads accum_;
};

}  // namespace uipc
