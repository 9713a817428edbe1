#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uipc/rng.hpp"
#include "uipc/tensor.hpp"

namespace uipc {

enum class ModelKind { MF, ACF, ProtoMF, UipcMF };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

// Below this norm a vector counts as degenerate and compares as the neutral
// similarity 1, with zero gradient, so training never produces NaNs.
inline constexpr double kNormEps = 1e-12;

// 1 + cos(a, b), range [0, 2].
double shifted_cosine(std::span<const double> a, std::span<const double> b);

// Similarity of one vector against every row of a prototype table, plus the
// cached norms/dots the backward pass needs.
struct SimDetail {
    std::vector<double> sim;     // 1 + cos(x, p_l)
    std::vector<double> dot;     // <x, p_l>
    std::vector<double> p_norm;  // ||p_l||
    double x_norm = 0.0;
};

SimDetail similarity_detail(std::span<const double> x, const Matrix& prototypes);
std::vector<double> similarity_vector(std::span<const double> x, const Matrix& prototypes);

// Accumulates coeff * d sim(x,p)/dx into gx and coeff * d sim(x,p)/dp into gp.
// dot_xp / x_norm / p_norm are the cached forward quantities.
void add_shifted_cosine_grad(std::span<const double> x, std::span<const double> p,
                             double dot_xp, double x_norm, double p_norm, double coeff,
                             std::span<double> gx, std::span<double> gp);

struct ScoredPair {
    int user = 0;
    int item = 0;
};

// One gradient matrix per parameter tensor, aligned with Model::tensors().
using Grads = std::vector<Matrix>;

// Positions of role-specific tensors inside the tensors() registry; -1 when
// the model has no tensor in that role. The regularizers use these to stay
// model-agnostic.
struct TensorRoles {
    int user_emb = -1;
    int item_emb = -1;
    int user_protos = -1;
    int item_protos = -1;
    int connections = -1;
};

// Read-only scoring interface; evaluation and explanation depend on nothing
// more, which keeps test oracles and fake scorers trivial.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(int user, int item) const = 0;
    virtual void score_batch(std::span<const ScoredPair> pairs, std::span<double> out) const;
};

class Model : public Scorer {
public:
    virtual ModelKind kind() const = 0;
    virtual int n_users() const = 0;
    virtual int n_items() const = 0;
    virtual int dim() const = 0;

    // Fixed-order parameter registry; order defines gradient slots, optimizer
    // state, checkpoint file enumeration and initialization draws.
    virtual std::vector<Matrix*> tensors() = 0;
    virtual std::vector<const Matrix*> tensors() const = 0;
    virtual std::vector<std::string> tensor_names() const = 0;
    virtual TensorRoles roles() const { return {}; }

    // Accumulates coeffs[k] * d score(pairs[k]) / d theta into grads.
    virtual void backward_batch(std::span<const ScoredPair> pairs,
                                std::span<const double> coeffs, Grads& grads) const = 0;

    Grads zero_grads() const;
    std::vector<Matrix> snapshot() const;
    void restore(const std::vector<Matrix>& snap);
    std::int64_t allocated_parameters() const;

    void check_user(int u) const;
    void check_item(int t) const;
};

// Per-pair decomposition of the UIPC logit: total == sum(prototype_scores)
// with prototype_scores[j] = preferences[j] * t_star[j].
struct ScoreBreakdown {
    std::vector<double> u_star;
    std::vector<double> t_star;
    std::vector<double> preferences;
    std::vector<double> prototype_scores;
    double total = 0.0;
};

class UipcModel final : public Model {
public:
    UipcModel(int n_users, int n_items, int n_user_protos, int n_item_protos, int dim);

    Matrix user_emb;     // N x d
    Matrix item_emb;     // M x d
    Matrix user_protos;  // Lu x d
    Matrix item_protos;  // Lt x d
    Matrix connections;  // Lu x Lt

    ModelKind kind() const override { return ModelKind::UipcMF; }
    int n_users() const override { return user_emb.rows(); }
    int n_items() const override { return item_emb.rows(); }
    int dim() const override { return user_emb.cols(); }
    int n_user_protos() const { return user_protos.rows(); }
    int n_item_protos() const { return item_protos.rows(); }

    std::vector<Matrix*> tensors() override;
    std::vector<const Matrix*> tensors() const override;
    std::vector<std::string> tensor_names() const override;
    TensorRoles roles() const override;

    double score(int user, int item) const override;
    void score_batch(std::span<const ScoredPair> pairs, std::span<double> out) const override;
    void backward_batch(std::span<const ScoredPair> pairs,
                        std::span<const double> coeffs, Grads& grads) const override;

    std::vector<double> user_similarities(int user) const;  // u*
    std::vector<double> item_similarities(int item) const;  // t*
    std::vector<double> preference_vector(int user) const;  // r = W^T u*
    ScoreBreakdown breakdown(int user, int item) const;
};

// Formula-level parameter accounting. n_user_protos doubles as the anchor
// count for ACF; the ACF formula counts per-entity parameters as d-vectors,
// so it matches the allocated total exactly when K == d.
std::int64_t parameter_count(ModelKind kind, std::int64_t n_users, std::int64_t n_items,
                             std::int64_t n_user_protos, std::int64_t n_item_protos,
                             std::int64_t dim);

// Fresh model with the standard initialization: embeddings, prototypes and
// coefficient logits ~ N(0, 0.1^2); connection weights ~ N(0, 1/sqrt(Lu*Lt));
// linear side maps ~ N(0, 1/sqrt(L*d)). Draws happen in tensors() order.
std::unique_ptr<Model> create_model(ModelKind kind, int n_users, int n_items,
                                    int n_user_protos, int n_item_protos, int dim, Rng& rng);

}  // namespace uipc
