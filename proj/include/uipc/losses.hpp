#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uipc/model.hpp"

namespace uipc {

enum class BaseLoss { BCE, BPR, SSM };

std::string to_string(BaseLoss kind);
BaseLoss base_loss_from_string(std::string_view name);

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

struct RegWeights {
    double lambda_l2 = 0.0;
    double lambda_1 = 0.0;  // prototypes -> users
    double lambda_2 = 0.0;  // users -> prototypes
    double lambda_3 = 0.0;  // prototypes -> items
    double lambda_4 = 0.0;  // items -> prototypes
    double lambda_l1 = 0.0;

    void validate() const;
};

// One training batch: sampled positives with their per-positive negatives and
// the deduplicated entity sets the batch-restricted regularizers run over.
struct Batch {
    std::vector<ScoredPair> positives;
    std::vector<std::vector<int>> negatives;  // aligned with positives
    std::vector<int> users;                   // sorted unique users of the positives
    std::vector<int> items;                   // sorted unique items (positive + negative)

    static Batch make(std::vector<ScoredPair> positives, std::vector<std::vector<int>> negatives);
};

// Unweighted term values; total applies the lambda weights.
struct LossReport {
    double base = 0.0;
    double l2 = 0.0;
    double reg_pu_to_u = 0.0;
    double reg_u_to_pu = 0.0;
    double reg_pt_to_t = 0.0;
    double reg_t_to_pt = 0.0;
    double l1_pref = 0.0;
    double total = 0.0;

    bool all_finite() const;
    // Name of the first non-finite field, or empty.
    std::string first_non_finite() const;
};

struct InterpTerms {
    double pu_to_u = 0.0;
    double u_to_pu = 0.0;
    double pt_to_t = 0.0;
    double t_to_pt = 0.0;
};

// Base losses. Values follow the stated conventions: BCE is an unnormalized
// sum, BPR averages over (positive, negative) pairs, SSM averages over
// positives. Gradients accumulate into *grads when non-null.
double bce_loss(const Model& model, const Batch& batch, Grads* grads);
double bpr_loss(const Model& model, const Batch& batch, Grads* grads);
double ssm_loss(const Model& model, const Batch& batch, Grads* grads);

// Returns sum(theta^2) (squared = true) or sqrt of it; the gradient is
// accumulated scaled by `weight`.
double l2_penalty(const Model& model, bool squared, double weight, Grads* grads);

// The four batch-restricted max-similarity terms. Values are unweighted;
// gradients flow only to each hard-max argmax pair (ties to lowest index),
// scaled by the matching lambda. Requires a model with prototype roles.
InterpTerms interpretability_terms(const Model& model, std::span<const int> batch_users,
                                   std::span<const int> batch_items, const RegWeights& reg,
                                   Grads* grads);

// Mean absolute preference value over the batch users; subgradient 0 at
// exact zeros. Requires a model with a connections tensor (UIPC-MF).
double l1_preference_norm(const Model& model, std::span<const int> batch_users, double weight,
                          Grads* grads);

// Full objective: base + lambda_l2 * l2 + sum lambda_i * R_i + lambda_l1 * l1.
// Regularizer terms that do not apply to the model (no prototypes / no
// connections) are skipped, as are terms whose lambda is zero.
LossReport total_loss(const Model& model, const Batch& batch, const RegWeights& reg,
                      BaseLoss base_kind, bool l2_squared, Grads* grads);

}  // namespace uipc
