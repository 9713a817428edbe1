#include "uipc/model.hpp"

#include <stdexcept>

#include "uipc/baselines.hpp"

namespace uipc {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::MF: return "mf";
        case ModelKind::ACF: return "acf";
        case ModelKind::ProtoMF: return "protomf";
        case ModelKind::UipcMF: return "uipc-mf";
    }
    throw std::logic_error("unreachable model kind");
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "mf") return ModelKind::MF;
    if (name == "acf") return ModelKind::ACF;
    if (name == "protomf") return ModelKind::ProtoMF;
    if (name == "uipc-mf" || name == "uipc-mf-l1") return ModelKind::UipcMF;
    throw std::invalid_argument("unknown model kind '" + std::string(name) +
                                "'; valid kinds: mf, acf, protomf, uipc-mf, uipc-mf-l1");
}

double shifted_cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("shifted_cosine: dimension mismatch");
    double na = norm2(a), nb = norm2(b);
    if (na < kNormEps || nb < kNormEps) return 1.0;
    return 1.0 + dot(a, b) / (na * nb);
}

SimDetail similarity_detail(std::span<const double> x, const Matrix& prototypes) {
    if (static_cast<int>(x.size()) != prototypes.cols())
        throw std::invalid_argument("similarity_detail: dimension mismatch");
    const int L = prototypes.rows();
    SimDetail d;
    d.sim.resize(L);
    d.dot.resize(L);
    d.p_norm.resize(L);
    d.x_norm = norm2(x);
    for (int l = 0; l < L; ++l) {
        auto p = prototypes.row(l);
        d.dot[l] = dot(x, p);
        d.p_norm[l] = norm2(p);
        if (d.x_norm < kNormEps || d.p_norm[l] < kNormEps)
            d.sim[l] = 1.0;
        else
            d.sim[l] = 1.0 + d.dot[l] / (d.x_norm * d.p_norm[l]);
    }
    return d;
}

std::vector<double> similarity_vector(std::span<const double> x, const Matrix& prototypes) {
    return similarity_detail(x, prototypes).sim;
}

void add_shifted_cosine_grad(std::span<const double> x, std::span<const double> p,
                             double dot_xp, double x_norm, double p_norm, double coeff,
                             std::span<double> gx, std::span<double> gp) {
    if (x_norm < kNormEps || p_norm < kNormEps) return;  // sim is constant there
    const double inv = 1.0 / (x_norm * p_norm);
    const double sx = dot_xp / (x_norm * x_norm);
    const double sp = dot_xp / (p_norm * p_norm);
    for (std::size_t k = 0; k < x.size(); ++k) {
        gx[k] += coeff * inv * (p[k] - sx * x[k]);
        gp[k] += coeff * inv * (x[k] - sp * p[k]);
    }
}

void Scorer::score_batch(std::span<const ScoredPair> pairs, std::span<double> out) const {
    for (std::size_t k = 0; k < pairs.size(); ++k) out[k] = score(pairs[k].user, pairs[k].item);
}

Grads Model::zero_grads() const {
    Grads g;
    for (const Matrix* t : tensors()) g.emplace_back(t->rows(), t->cols());
    return g;
}

std::vector<Matrix> Model::snapshot() const {
    std::vector<Matrix> s;
    for (const Matrix* t : tensors()) s.push_back(*t);
    return s;
}

void Model::restore(const std::vector<Matrix>& snap) {
    auto ts = tensors();
    if (snap.size() != ts.size()) throw std::invalid_argument("restore: tensor count mismatch");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!ts[i]->same_shape(snap[i])) throw std::invalid_argument("restore: shape mismatch");
        *ts[i] = snap[i];
    }
}

std::int64_t Model::allocated_parameters() const {
    std::int64_t n = 0;
    for (const Matrix* t : tensors()) n += static_cast<std::int64_t>(t->size());
    return n;
}

void Model::check_user(int u) const {
    if (u < 0 || u >= n_users()) throw std::out_of_range("user index out of range");
}

void Model::check_item(int t) const {
    if (t < 0 || t >= n_items()) throw std::out_of_range("item index out of range");
}

// ---------------------------------------------------------------- UipcModel

UipcModel::UipcModel(int n_users_, int n_items_, int n_user_protos_, int n_item_protos_, int dim_)
    : user_emb(n_users_, dim_),
      item_emb(n_items_, dim_),
      user_protos(n_user_protos_, dim_),
      item_protos(n_item_protos_, dim_),
      connections(n_user_protos_, n_item_protos_) {
    if (dim_ < 1) throw std::invalid_argument("UipcModel: dim must be >= 1");
    if (n_user_protos_ < 1 || n_item_protos_ < 1)
        throw std::invalid_argument("UipcModel: prototype counts must be >= 1");
    if (n_user_protos_ > n_users_ || n_item_protos_ > n_items_)
        throw std::invalid_argument("UipcModel: prototype counts must not exceed entity counts");
}

std::vector<Matrix*> UipcModel::tensors() {
    return {&user_emb, &item_emb, &user_protos, &item_protos, &connections};
}

std::vector<const Matrix*> UipcModel::tensors() const {
    return {&user_emb, &item_emb, &user_protos, &item_protos, &connections};
}

std::vector<std::string> UipcModel::tensor_names() const {
    return {"user_embeddings", "item_embeddings", "user_prototypes", "item_prototypes", "connections"};
}

TensorRoles UipcModel::roles() const {
    TensorRoles r;
    r.user_emb = 0;
    r.item_emb = 1;
    r.user_protos = 2;
    r.item_protos = 3;
    r.connections = 4;
    return r;
}

std::vector<double> UipcModel::user_similarities(int user) const {
    check_user(user);
    return similarity_vector(user_emb.row(user), user_protos);
}

std::vector<double> UipcModel::item_similarities(int item) const {
    check_item(item);
    return similarity_vector(item_emb.row(item), item_protos);
}

std::vector<double> UipcModel::preference_vector(int user) const {
    check_user(user);
    auto u_star = user_similarities(user);
    const int lu = connections.rows(), lt = connections.cols();
    std::vector<double> r(lt, 0.0);
    for (int i = 0; i < lu; ++i)
        for (int j = 0; j < lt; ++j) r[j] += connections(i, j) * u_star[i];
    return r;
}

double UipcModel::score(int user, int item) const {
    check_user(user);
    check_item(item);
    auto r = preference_vector(user);
    auto t_star = item_similarities(item);
    return dot(r, t_star);
}

ScoreBreakdown UipcModel::breakdown(int user, int item) const {
    ScoreBreakdown b;
    b.u_star = user_similarities(user);
    b.t_star = item_similarities(item);
    b.preferences = preference_vector(user);
    const int lt = connections.cols();
    b.prototype_scores.resize(lt);
    b.total = 0.0;
    for (int j = 0; j < lt; ++j) {
        b.prototype_scores[j] = b.preferences[j] * b.t_star[j];
        b.total += b.prototype_scores[j];
    }
    return b;
}

namespace {

// Batch-local cache of similarity details and preference vectors; score and
// backward both cost O((Lu + Lt) d) once per distinct entity instead of once
// per pair.
struct UipcBatchCache {
    std::vector<int> users, items;            // sorted unique
    std::vector<SimDetail> u_sim, t_sim;      // per distinct user / item
    std::vector<std::vector<double>> prefs;   // r = W^T u* per distinct user
    std::vector<int> user_slot, item_slot;    // entity id -> local slot (dense maps)

    UipcBatchCache(const UipcModel& m, std::span<const ScoredPair> pairs) {
        user_slot.assign(m.n_users(), -1);
        item_slot.assign(m.n_items(), -1);
        for (const auto& p : pairs) {
            if (user_slot[p.user] < 0) {
                user_slot[p.user] = static_cast<int>(users.size());
                users.push_back(p.user);
            }
            if (item_slot[p.item] < 0) {
                item_slot[p.item] = static_cast<int>(items.size());
                items.push_back(p.item);
            }
        }
        const int lu = m.connections.rows(), lt = m.connections.cols();
        u_sim.reserve(users.size());
        prefs.reserve(users.size());
        for (int u : users) {
            u_sim.push_back(similarity_detail(m.user_emb.row(u), m.user_protos));
            std::vector<double> r(lt, 0.0);
            const auto& sim = u_sim.back().sim;
            for (int i = 0; i < lu; ++i)
                for (int j = 0; j < lt; ++j) r[j] += m.connections(i, j) * sim[i];
            prefs.push_back(std::move(r));
        }
        t_sim.reserve(items.size());
        for (int t : items) t_sim.push_back(similarity_detail(m.item_emb.row(t), m.item_protos));
    }
};

}  // namespace

void UipcModel::score_batch(std::span<const ScoredPair> pairs, std::span<double> out) const {
    for (const auto& p : pairs) {
        check_user(p.user);
        check_item(p.item);
    }
    UipcBatchCache cache(*this, pairs);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& r = cache.prefs[cache.user_slot[pairs[k].user]];
        const auto& t_star = cache.t_sim[cache.item_slot[pairs[k].item]].sim;
        out[k] = dot(r, t_star);
    }
}

void UipcModel::backward_batch(std::span<const ScoredPair> pairs,
                               std::span<const double> coeffs, Grads& grads) const {
    for (const auto& p : pairs) {
        check_user(p.user);
        check_item(p.item);
    }
    UipcBatchCache cache(*this, pairs);
    const int lu = connections.rows(), lt = connections.cols();

    // d score / d r (per distinct user) and d score / d t* (per distinct item)
    std::vector<std::vector<double>> g_pref(cache.users.size(), std::vector<double>(lt, 0.0));
    std::vector<std::vector<double>> g_tsim(cache.items.size(), std::vector<double>(lt, 0.0));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double c = coeffs[k];
        if (c == 0.0) continue;
        const int us = cache.user_slot[pairs[k].user];
        const int ts = cache.item_slot[pairs[k].item];
        axpy(c, cache.t_sim[ts].sim, std::span<double>(g_pref[us]));
        axpy(c, cache.prefs[us], std::span<double>(g_tsim[ts]));
    }

    Matrix& g_user = grads[0];
    Matrix& g_item = grads[1];
    Matrix& g_up = grads[2];
    Matrix& g_tp = grads[3];
    Matrix& g_conn = grads[4];

    for (std::size_t s = 0; s < cache.users.size(); ++s) {
        const int u = cache.users[s];
        const auto& det = cache.u_sim[s];
        const auto& gr = g_pref[s];
        // r = W^T u*: dW(i,j) += u*_i * gr_j; d u*_i = sum_j W(i,j) gr_j
        std::vector<double> g_usim(lu, 0.0);
        for (int i = 0; i < lu; ++i) {
            double acc = 0.0;
            for (int j = 0; j < lt; ++j) {
                g_conn(i, j) += det.sim[i] * gr[j];
                acc += connections(i, j) * gr[j];
            }
            g_usim[i] = acc;
        }
        auto x = user_emb.row(u);
        for (int i = 0; i < lu; ++i) {
            if (g_usim[i] == 0.0) continue;
            add_shifted_cosine_grad(x, user_protos.row(i), det.dot[i], det.x_norm, det.p_norm[i],
                                    g_usim[i], g_user.row(u), g_up.row(i));
        }
    }

    for (std::size_t s = 0; s < cache.items.size(); ++s) {
        const int t = cache.items[s];
        const auto& det = cache.t_sim[s];
        const auto& gt = g_tsim[s];
        auto x = item_emb.row(t);
        for (int j = 0; j < lt; ++j) {
            if (gt[j] == 0.0) continue;
            add_shifted_cosine_grad(x, item_protos.row(j), det.dot[j], det.x_norm, det.p_norm[j],
                                    gt[j], g_item.row(t), g_tp.row(j));
        }
    }
}

// ------------------------------------------------------------ accounting

std::int64_t parameter_count(ModelKind kind, std::int64_t n_users, std::int64_t n_items,
                             std::int64_t n_user_protos, std::int64_t n_item_protos,
                             std::int64_t dim) {
    if (n_users < 1 || n_items < 1 || dim < 1)
        throw std::invalid_argument("parameter_count: shape values must be positive");
    const std::int64_t base = (n_users + n_items) * dim;
    switch (kind) {
        case ModelKind::MF: return base;
        case ModelKind::ACF: return base + n_user_protos * dim;
        case ModelKind::ProtoMF: return base + 2 * (n_user_protos + n_item_protos) * dim;
        case ModelKind::UipcMF:
            return base + (n_user_protos + n_item_protos) * dim + n_user_protos * n_item_protos;
    }
    throw std::logic_error("unreachable model kind");
}

// ---------------------------------------------------------------- factory

namespace {

void fill_normal(Matrix& m, double stddev, Rng& rng) {
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.normal(0.0, stddev);
}

}  // namespace

std::unique_ptr<Model> create_model(ModelKind kind, int n_users, int n_items,
                                    int n_user_protos, int n_item_protos, int dim, Rng& rng) {
    const double emb_sd = 0.1;
    switch (kind) {
        case ModelKind::MF: {
            auto m = std::make_unique<MfModel>(n_users, n_items, dim);
            fill_normal(m->user_emb, emb_sd, rng);
            fill_normal(m->item_emb, emb_sd, rng);
            return m;
        }
        case ModelKind::ACF: {
            auto m = std::make_unique<AcfModel>(n_users, n_items, n_user_protos, dim);
            fill_normal(m->user_logits, emb_sd, rng);
            fill_normal(m->item_logits, emb_sd, rng);
            fill_normal(m->anchors, emb_sd, rng);
            return m;
        }
        case ModelKind::ProtoMF: {
            auto m = std::make_unique<ProtoMfModel>(n_users, n_items, n_user_protos, n_item_protos, dim);
            fill_normal(m->user_emb, emb_sd, rng);
            fill_normal(m->item_emb, emb_sd, rng);
            fill_normal(m->user_protos, emb_sd, rng);
            fill_normal(m->item_protos, emb_sd, rng);
            fill_normal(m->item_side_weights, 1.0 / std::sqrt(double(n_user_protos) * dim), rng);
            fill_normal(m->user_side_weights, 1.0 / std::sqrt(double(n_item_protos) * dim), rng);
            return m;
        }
        case ModelKind::UipcMF: {
            auto m = std::make_unique<UipcModel>(n_users, n_items, n_user_protos, n_item_protos, dim);
            fill_normal(m->user_emb, emb_sd, rng);
            fill_normal(m->item_emb, emb_sd, rng);
            fill_normal(m->user_protos, emb_sd, rng);
            fill_normal(m->item_protos, emb_sd, rng);
            fill_normal(m->connections, 1.0 / std::sqrt(double(n_user_protos) * n_item_protos), rng);
            return m;
        }
    }
    throw std::logic_error("unreachable model kind");
}

}  // namespace uipc
