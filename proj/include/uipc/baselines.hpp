#pragma once

#include "uipc/model.hpp"

namespace uipc {

// Plain matrix factorization: score = <u, t>.
class MfModel final : public Model {
public:
    MfModel(int n_users, int n_items, int dim);

    Matrix user_emb;  // N x d
    Matrix item_emb;  // M x d

    ModelKind kind() const override { return ModelKind::MF; }
    int n_users() const override { return user_emb.rows(); }
    int n_items() const override { return item_emb.rows(); }
    int dim() const override { return user_emb.cols(); }

    std::vector<Matrix*> tensors() override;
    std::vector<const Matrix*> tensors() const override;
    std::vector<std::string> tensor_names() const override;
    TensorRoles roles() const override;

    double score(int user, int item) const override;
    void backward_batch(std::span<const ScoredPair> pairs,
                        std::span<const double> coeffs, Grads& grads) const override;
};

// Anchor-based collaborative filtering: entities are convex combinations of
// shared anchors (softmax over learned logits) and the score is the dot
// product of the two combinations.
class AcfModel final : public Model {
public:
    AcfModel(int n_users, int n_items, int n_anchors, int dim);

    Matrix user_logits;  // N x K
    Matrix item_logits;  // M x K
    Matrix anchors;      // K x d

    ModelKind kind() const override { return ModelKind::ACF; }
    int n_users() const override { return user_logits.rows(); }
    int n_items() const override { return item_logits.rows(); }
    int dim() const override { return anchors.cols(); }
    int n_anchors() const { return anchors.rows(); }

    std::vector<Matrix*> tensors() override;
    std::vector<const Matrix*> tensors() const override;
    std::vector<std::string> tensor_names() const override;

    double score(int user, int item) const override;
    void backward_batch(std::span<const ScoredPair> pairs,
                        std::span<const double> coeffs, Grads& grads) const override;

    std::vector<double> user_coefficients(int user) const;  // softmax(user_logits[u])
    std::vector<double> item_coefficients(int item) const;
    std::vector<double> user_representation(int user) const;  // coeffs^T anchors
    std::vector<double> item_representation(int item) const;
};

// Prototype-based matrix factorization: score = <u*, Wt t> + <t*, Wu u> with
// u*/t* the shifted-cosine similarity vectors against the prototype tables.
class ProtoMfModel final : public Model {
public:
    ProtoMfModel(int n_users, int n_items, int n_user_protos, int n_item_protos, int dim);

    Matrix user_emb;           // N x d
    Matrix item_emb;           // M x d
    Matrix user_protos;        // Lu x d
    Matrix item_protos;        // Lt x d
    Matrix item_side_weights;  // Lu x d, maps an item embedding into u*-space
    Matrix user_side_weights;  // Lt x d, maps a user embedding into t*-space

    ModelKind kind() const override { return ModelKind::ProtoMF; }
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
    void backward_batch(std::span<const ScoredPair> pairs,
                        std::span<const double> coeffs, Grads& grads) const override;
};

}  // namespace uipc
