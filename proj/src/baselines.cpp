#include "uipc/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace uipc {

// --------------------------------------------------------------------- MF

MfModel::MfModel(int n_users_, int n_items_, int dim_)
    : user_emb(n_users_, dim_), item_emb(n_items_, dim_) {
    if (dim_ < 1) throw std::invalid_argument("MfModel: dim must be >= 1");
}

std::vector<Matrix*> MfModel::tensors() { return {&user_emb, &item_emb}; }
std::vector<const Matrix*> MfModel::tensors() const { return {&user_emb, &item_emb}; }
std::vector<std::string> MfModel::tensor_names() const {
    return {"user_embeddings", "item_embeddings"};
}

TensorRoles MfModel::roles() const {
    TensorRoles r;
    r.user_emb = 0;
    r.item_emb = 1;
    return r;
}

double MfModel::score(int user, int item) const {
    check_user(user);
    check_item(item);
    return dot(user_emb.row(user), item_emb.row(item));
}

void MfModel::backward_batch(std::span<const ScoredPair> pairs,
                             std::span<const double> coeffs, Grads& grads) const {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [u, t] = pairs[k];
        check_user(u);
        check_item(t);
        const double c = coeffs[k];
        if (c == 0.0) continue;
        axpy(c, item_emb.row(t), grads[0].row(u));
        axpy(c, user_emb.row(u), grads[1].row(t));
    }
}

// -------------------------------------------------------------------- ACF

AcfModel::AcfModel(int n_users_, int n_items_, int n_anchors_, int dim_)
    : user_logits(n_users_, n_anchors_), item_logits(n_items_, n_anchors_), anchors(n_anchors_, dim_) {
    if (dim_ < 1) throw std::invalid_argument("AcfModel: dim must be >= 1");
    if (n_anchors_ < 1) throw std::invalid_argument("AcfModel: anchor count must be >= 1");
}

std::vector<Matrix*> AcfModel::tensors() { return {&user_logits, &item_logits, &anchors}; }
std::vector<const Matrix*> AcfModel::tensors() const { return {&user_logits, &item_logits, &anchors}; }
std::vector<std::string> AcfModel::tensor_names() const {
    return {"user_coefficient_logits", "item_coefficient_logits", "anchors"};
}

namespace {

std::vector<double> softmax(std::span<const double> logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

std::vector<double> combine(std::span<const double> coeffs, const Matrix& anchors) {
    std::vector<double> x(anchors.cols(), 0.0);
    for (int k = 0; k < anchors.rows(); ++k) axpy(coeffs[k], anchors.row(k), std::span<double>(x));
    return x;
}

}  // namespace

std::vector<double> AcfModel::user_coefficients(int user) const {
    check_user(user);
    return softmax(user_logits.row(user));
}

std::vector<double> AcfModel::item_coefficients(int item) const {
    check_item(item);
    return softmax(item_logits.row(item));
}

std::vector<double> AcfModel::user_representation(int user) const {
    return combine(user_coefficients(user), anchors);
}

std::vector<double> AcfModel::item_representation(int item) const {
    return combine(item_coefficients(item), anchors);
}

double AcfModel::score(int user, int item) const {
    auto xu = user_representation(user);
    auto xt = item_representation(item);
    return dot(xu, xt);
}

void AcfModel::backward_batch(std::span<const ScoredPair> pairs,
                              std::span<const double> coeffs, Grads& grads) const {
    for (const auto& p : pairs) {
        check_user(p.user);
        check_item(p.item);
    }
    const int K = anchors.rows();

    // distinct entities with cached coefficients/representations
    std::vector<int> user_slot(n_users(), -1), item_slot(n_items(), -1);
    std::vector<int> users, items;
    std::vector<std::vector<double>> cu, xu, ct, xt;
    for (const auto& p : pairs) {
        if (user_slot[p.user] < 0) {
            user_slot[p.user] = static_cast<int>(users.size());
            users.push_back(p.user);
            cu.push_back(softmax(user_logits.row(p.user)));
            xu.push_back(combine(cu.back(), anchors));
        }
        if (item_slot[p.item] < 0) {
            item_slot[p.item] = static_cast<int>(items.size());
            items.push_back(p.item);
            ct.push_back(softmax(item_logits.row(p.item)));
            xt.push_back(combine(ct.back(), anchors));
        }
    }

    std::vector<std::vector<double>> gxu(users.size(), std::vector<double>(dim(), 0.0));
    std::vector<std::vector<double>> gxt(items.size(), std::vector<double>(dim(), 0.0));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double c = coeffs[k];
        if (c == 0.0) continue;
        const int us = user_slot[pairs[k].user];
        const int ts = item_slot[pairs[k].item];
        axpy(c, std::span<const double>(xt[ts]), std::span<double>(gxu[us]));
        axpy(c, std::span<const double>(xu[us]), std::span<double>(gxt[ts]));
    }

    // chain x = coeffs^T A through the anchors and the softmax
    auto backprop_entity = [&](int entity, const std::vector<double>& co,
                               const std::vector<double>& gx, Matrix& g_logits) {
        std::vector<double> h(K);
        double mean_h = 0.0;
        for (int k = 0; k < K; ++k) {
            axpy(co[k], std::span<const double>(gx), grads[2].row(k));
            h[k] = dot(anchors.row(k), std::span<const double>(gx));
            mean_h += co[k] * h[k];
        }
        for (int k = 0; k < K; ++k) g_logits(entity, k) += co[k] * (h[k] - mean_h);
    };

    for (std::size_t s = 0; s < users.size(); ++s) backprop_entity(users[s], cu[s], gxu[s], grads[0]);
    for (std::size_t s = 0; s < items.size(); ++s) backprop_entity(items[s], ct[s], gxt[s], grads[1]);
}

// ---------------------------------------------------------------- ProtoMF

ProtoMfModel::ProtoMfModel(int n_users_, int n_items_, int n_user_protos_, int n_item_protos_, int dim_)
    : user_emb(n_users_, dim_),
      item_emb(n_items_, dim_),
      user_protos(n_user_protos_, dim_),
      item_protos(n_item_protos_, dim_),
      item_side_weights(n_user_protos_, dim_),
      user_side_weights(n_item_protos_, dim_) {
    if (dim_ < 1) throw std::invalid_argument("ProtoMfModel: dim must be >= 1");
    if (n_user_protos_ < 1 || n_item_protos_ < 1)
        throw std::invalid_argument("ProtoMfModel: prototype counts must be >= 1");
}

std::vector<Matrix*> ProtoMfModel::tensors() {
    return {&user_emb, &item_emb, &user_protos, &item_protos, &item_side_weights, &user_side_weights};
}

std::vector<const Matrix*> ProtoMfModel::tensors() const {
    return {&user_emb, &item_emb, &user_protos, &item_protos, &item_side_weights, &user_side_weights};
}

std::vector<std::string> ProtoMfModel::tensor_names() const {
    return {"user_embeddings", "item_embeddings", "user_prototypes",
            "item_prototypes", "item_side_weights", "user_side_weights"};
}

TensorRoles ProtoMfModel::roles() const {
    TensorRoles r;
    r.user_emb = 0;
    r.item_emb = 1;
    r.user_protos = 2;
    r.item_protos = 3;
    return r;
}

namespace {

// y = M x for a row-major L x d map
std::vector<double> apply_map(const Matrix& m, std::span<const double> x) {
    std::vector<double> y(m.rows());
    for (int l = 0; l < m.rows(); ++l) y[l] = dot(m.row(l), x);
    return y;
}

}  // namespace

double ProtoMfModel::score(int user, int item) const {
    check_user(user);
    check_item(item);
    auto u_star = similarity_vector(user_emb.row(user), user_protos);
    auto t_star = similarity_vector(item_emb.row(item), item_protos);
    auto yt = apply_map(item_side_weights, item_emb.row(item));  // Lu
    auto yu = apply_map(user_side_weights, user_emb.row(user));  // Lt
    return dot(u_star, yt) + dot(t_star, yu);
}

void ProtoMfModel::backward_batch(std::span<const ScoredPair> pairs,
                                  std::span<const double> coeffs, Grads& grads) const {
    for (const auto& p : pairs) {
        check_user(p.user);
        check_item(p.item);
    }
    const int lu = user_protos.rows(), lt = item_protos.rows();

    std::vector<int> user_slot(n_users(), -1), item_slot(n_items(), -1);
    std::vector<int> users, items;
    std::vector<SimDetail> u_sim, t_sim;
    std::vector<std::vector<double>> yu, yt;
    for (const auto& p : pairs) {
        if (user_slot[p.user] < 0) {
            user_slot[p.user] = static_cast<int>(users.size());
            users.push_back(p.user);
            u_sim.push_back(similarity_detail(user_emb.row(p.user), user_protos));
            yu.push_back(apply_map(user_side_weights, user_emb.row(p.user)));
        }
        if (item_slot[p.item] < 0) {
            item_slot[p.item] = static_cast<int>(items.size());
            items.push_back(p.item);
            t_sim.push_back(similarity_detail(item_emb.row(p.item), item_protos));
            yt.push_back(apply_map(item_side_weights, item_emb.row(p.item)));
        }
    }

    std::vector<std::vector<double>> g_usim(users.size(), std::vector<double>(lu, 0.0));
    std::vector<std::vector<double>> g_tsim(items.size(), std::vector<double>(lt, 0.0));
    std::vector<std::vector<double>> g_yu(users.size(), std::vector<double>(lt, 0.0));
    std::vector<std::vector<double>> g_yt(items.size(), std::vector<double>(lu, 0.0));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double c = coeffs[k];
        if (c == 0.0) continue;
        const int us = user_slot[pairs[k].user];
        const int ts = item_slot[pairs[k].item];
        axpy(c, std::span<const double>(yt[ts]), std::span<double>(g_usim[us]));
        axpy(c, u_sim[us].sim, std::span<double>(g_yt[ts]));
        axpy(c, std::span<const double>(yu[us]), std::span<double>(g_tsim[ts]));
        axpy(c, t_sim[ts].sim, std::span<double>(g_yu[us]));
    }

    Matrix& g_user = grads[0];
    Matrix& g_item = grads[1];
    Matrix& g_up = grads[2];
    Matrix& g_tp = grads[3];
    Matrix& g_wt = grads[4];
    Matrix& g_wu = grads[5];

    for (std::size_t s = 0; s < users.size(); ++s) {
        const int u = users[s];
        auto x = user_emb.row(u);
        const auto& det = u_sim[s];
        for (int i = 0; i < lu; ++i) {
            if (g_usim[s][i] == 0.0) continue;
            add_shifted_cosine_grad(x, user_protos.row(i), det.dot[i], det.x_norm, det.p_norm[i],
                                    g_usim[s][i], g_user.row(u), g_up.row(i));
        }
        // yu = user_side_weights * u
        for (int j = 0; j < lt; ++j) {
            const double gy = g_yu[s][j];
            if (gy == 0.0) continue;
            axpy(gy, x, g_wu.row(j));
            axpy(gy, user_side_weights.row(j), g_user.row(u));
        }
    }

    for (std::size_t s = 0; s < items.size(); ++s) {
        const int t = items[s];
        auto x = item_emb.row(t);
        const auto& det = t_sim[s];
        for (int j = 0; j < lt; ++j) {
            if (g_tsim[s][j] == 0.0) continue;
            add_shifted_cosine_grad(x, item_protos.row(j), det.dot[j], det.x_norm, det.p_norm[j],
                                    g_tsim[s][j], g_item.row(t), g_tp.row(j));
        }
        for (int i = 0; i < lu; ++i) {
            const double gy = g_yt[s][i];
            if (gy == 0.0) continue;
            axpy(gy, x, g_wt.row(i));
            axpy(gy, item_side_weights.row(i), g_item.row(t));
        }
    }
}

}  // namespace uipc
