#include "uipc/losses.hpp"

#include <algorithm>
#include <stdexcept>

namespace uipc {

std::string to_string(BaseLoss kind) {
    switch (kind) {
        case BaseLoss::BCE: return "bce";
        case BaseLoss::BPR: return "bpr";
        case BaseLoss::SSM: return "ssm";
    }
    throw std::logic_error("unreachable base loss kind");
}

BaseLoss base_loss_from_string(std::string_view name) {
    if (name == "bce") return BaseLoss::BCE;
    if (name == "bpr") return BaseLoss::BPR;
    if (name == "ssm") return BaseLoss::SSM;
    throw std::invalid_argument("unknown base loss '" + std::string(name) + "'; valid: bce, bpr, ssm");
}

void RegWeights::validate() const {
    for (double v : {lambda_l2, lambda_1, lambda_2, lambda_3, lambda_4, lambda_l1})
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("regularization weights must be finite and >= 0");
}

Batch Batch::make(std::vector<ScoredPair> positives, std::vector<std::vector<int>> negatives) {
    if (positives.size() != negatives.size())
        throw std::invalid_argument("Batch: positives/negatives length mismatch");
    Batch b;
    b.positives = std::move(positives);
    b.negatives = std::move(negatives);
    for (const auto& p : b.positives) {
        b.users.push_back(p.user);
        b.items.push_back(p.item);
    }
    for (const auto& ns : b.negatives)
        for (int n : ns) b.items.push_back(n);
    auto dedup = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup(b.users);
    dedup(b.items);
    return b;
}

bool LossReport::all_finite() const { return first_non_finite().empty(); }

std::string LossReport::first_non_finite() const {
    const std::pair<const char*, double> fields[] = {
        {"base", base},           {"l2", l2},
        {"reg_pu_to_u", reg_pu_to_u}, {"reg_u_to_pu", reg_u_to_pu},
        {"reg_pt_to_t", reg_pt_to_t}, {"reg_t_to_pt", reg_t_to_pt},
        {"l1_pref", l1_pref},     {"total", total},
    };
    for (const auto& [name, v] : fields)
        if (!std::isfinite(v)) return name;
    return {};
}

namespace {

// Pair layout shared by the base losses: positives first, then the flattened
// negatives; neg_start[k] is where positive k's negatives begin.
struct PairLayout {
    std::vector<ScoredPair> pairs;
    std::vector<std::size_t> neg_start;
};

PairLayout flatten(const Batch& batch) {
    PairLayout lay;
    lay.pairs = batch.positives;
    lay.neg_start.resize(batch.positives.size());
    for (std::size_t k = 0; k < batch.positives.size(); ++k) {
        lay.neg_start[k] = lay.pairs.size();
        const int u = batch.positives[k].user;
        for (int n : batch.negatives[k]) lay.pairs.push_back({u, n});
    }
    return lay;
}

void require_negatives(const Batch& batch, const char* loss_name) {
    for (const auto& ns : batch.negatives)
        if (ns.empty())
            throw std::invalid_argument(std::string(loss_name) + ": every positive needs >= 1 negative");
}

}  // namespace

double bce_loss(const Model& model, const Batch& batch, Grads* grads) {
    if (batch.positives.empty()) throw std::invalid_argument("bce_loss: empty batch");
    PairLayout lay = flatten(batch);
    std::vector<double> scores(lay.pairs.size());
    model.score_batch(lay.pairs, scores);

    const std::size_t p = batch.positives.size();
    double loss = 0.0;
    std::vector<double> coeffs(lay.pairs.size(), 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        loss += softplus(-scores[k]);  // -log sigmoid(f)
        coeffs[k] = sigmoid(scores[k]) - 1.0;
    }
    for (std::size_t k = p; k < lay.pairs.size(); ++k) {
        loss += softplus(scores[k]);  // -log(1 - sigmoid(f))
        coeffs[k] = sigmoid(scores[k]);
    }
    if (grads) model.backward_batch(lay.pairs, coeffs, *grads);
    return loss;
}

double bpr_loss(const Model& model, const Batch& batch, Grads* grads) {
    if (batch.positives.empty()) throw std::invalid_argument("bpr_loss: empty batch");
    require_negatives(batch, "bpr_loss");
    PairLayout lay = flatten(batch);
    std::vector<double> scores(lay.pairs.size());
    model.score_batch(lay.pairs, scores);

    std::size_t n_pairs = 0;
    for (const auto& ns : batch.negatives) n_pairs += ns.size();
    const double inv = 1.0 / static_cast<double>(n_pairs);

    double loss = 0.0;
    std::vector<double> coeffs(lay.pairs.size(), 0.0);
    for (std::size_t k = 0; k < batch.positives.size(); ++k) {
        const double f_pos = scores[k];
        for (std::size_t j = 0; j < batch.negatives[k].size(); ++j) {
            const std::size_t idx = lay.neg_start[k] + j;
            const double diff = f_pos - scores[idx];
            loss += inv * softplus(-diff);
            const double g = inv * (sigmoid(diff) - 1.0);  // d/d diff
            coeffs[k] += g;
            coeffs[idx] -= g;
        }
    }
    if (grads) model.backward_batch(lay.pairs, coeffs, *grads);
    return loss;
}

double ssm_loss(const Model& model, const Batch& batch, Grads* grads) {
    if (batch.positives.empty()) throw std::invalid_argument("ssm_loss: empty batch");
    require_negatives(batch, "ssm_loss");
    PairLayout lay = flatten(batch);
    std::vector<double> scores(lay.pairs.size());
    model.score_batch(lay.pairs, scores);

    const double inv = 1.0 / static_cast<double>(batch.positives.size());
    double loss = 0.0;
    std::vector<double> coeffs(lay.pairs.size(), 0.0);
    for (std::size_t k = 0; k < batch.positives.size(); ++k) {
        const std::size_t begin = lay.neg_start[k];
        const std::size_t count = batch.negatives[k].size();
        double mx = scores[k];
        for (std::size_t j = 0; j < count; ++j) mx = std::max(mx, scores[begin + j]);
        double z = std::exp(scores[k] - mx);
        for (std::size_t j = 0; j < count; ++j) z += std::exp(scores[begin + j] - mx);
        const double lse = mx + std::log(z);
        loss += inv * (lse - scores[k]);
        coeffs[k] += inv * (std::exp(scores[k] - lse) - 1.0);
        for (std::size_t j = 0; j < count; ++j)
            coeffs[begin + j] += inv * std::exp(scores[begin + j] - lse);
    }
    if (grads) model.backward_batch(lay.pairs, coeffs, *grads);
    return loss;
}

double l2_penalty(const Model& model, bool squared, double weight, Grads* grads) {
    double sumsq = 0.0;
    const auto tensors = model.tensors();
    for (const Matrix* t : tensors) {
        const double* d = t->data();
        for (std::size_t i = 0; i < t->size(); ++i) sumsq += d[i] * d[i];
    }
    if (squared) {
        if (grads)
            for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
                const double* d = tensors[ti]->data();
                double* g = (*grads)[ti].data();
                for (std::size_t i = 0; i < tensors[ti]->size(); ++i) g[i] += weight * 2.0 * d[i];
            }
        return sumsq;
    }
    const double norm = std::sqrt(sumsq);
    if (grads && norm > 0.0)
        for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
            const double* d = tensors[ti]->data();
            double* g = (*grads)[ti].data();
            for (std::size_t i = 0; i < tensors[ti]->size(); ++i) g[i] += weight * d[i] / norm;
        }
    return norm;
}

namespace {

// One side of the interpretability penalty: entities vs a prototype table.
// proto_to_entity = -(1/L) sum_l max_i sim; entity_to_proto = -(1/B) sum_i max_l sim.
// Gradients flow to the argmax pairs only, ties to the lowest index.
struct SidePair {
    double proto_to_entity = 0.0;
    double entity_to_proto = 0.0;
};

SidePair interp_side(const Matrix& emb, const Matrix& protos, std::span<const int> entities,
                     double lambda_proto_to_entity, double lambda_entity_to_proto,
                     Matrix* g_emb, Matrix* g_protos) {
    const int L = protos.rows();
    const std::size_t B = entities.size();
    std::vector<SimDetail> details;
    details.reserve(B);
    for (int e : entities) details.push_back(similarity_detail(emb.row(e), protos));

    SidePair out;

    // per prototype: best entity
    std::vector<std::size_t> best_entity(L, 0);
    for (int l = 0; l < L; ++l) {
        double best = details[0].sim[l];
        for (std::size_t i = 1; i < B; ++i)
            if (details[i].sim[l] > best) {
                best = details[i].sim[l];
                best_entity[l] = i;
            }
        out.proto_to_entity -= best / L;
    }
    // per entity: best prototype
    std::vector<int> best_proto(B, 0);
    for (std::size_t i = 0; i < B; ++i) {
        double best = details[i].sim[0];
        for (int l = 1; l < L; ++l)
            if (details[i].sim[l] > best) {
                best = details[i].sim[l];
                best_proto[i] = l;
            }
        out.entity_to_proto -= best / static_cast<double>(B);
    }

    if (g_emb && g_protos) {
        for (int l = 0; l < L; ++l) {
            if (lambda_proto_to_entity == 0.0) break;
            const std::size_t i = best_entity[l];
            const int e = entities[i];
            add_shifted_cosine_grad(emb.row(e), protos.row(l), details[i].dot[l],
                                    details[i].x_norm, details[i].p_norm[l],
                                    -lambda_proto_to_entity / L, g_emb->row(e), g_protos->row(l));
        }
        for (std::size_t i = 0; i < B; ++i) {
            if (lambda_entity_to_proto == 0.0) break;
            const int l = best_proto[i];
            const int e = entities[i];
            add_shifted_cosine_grad(emb.row(e), protos.row(l), details[i].dot[l],
                                    details[i].x_norm, details[i].p_norm[l],
                                    -lambda_entity_to_proto / static_cast<double>(B),
                                    g_emb->row(e), g_protos->row(l));
        }
    }
    return out;
}

}  // namespace

InterpTerms interpretability_terms(const Model& model, std::span<const int> batch_users,
                                   std::span<const int> batch_items, const RegWeights& reg,
                                   Grads* grads) {
    const TensorRoles roles = model.roles();
    if (roles.user_emb < 0 || roles.item_emb < 0 || roles.user_protos < 0 || roles.item_protos < 0)
        throw std::invalid_argument("interpretability_terms: model has no prototype structure");
    if (batch_users.empty() || batch_items.empty())
        throw std::invalid_argument("interpretability_terms: empty batch index sets");

    const auto tensors = model.tensors();
    const Matrix& U = *tensors[roles.user_emb];
    const Matrix& T = *tensors[roles.item_emb];
    const Matrix& Pu = *tensors[roles.user_protos];
    const Matrix& Pt = *tensors[roles.item_protos];

    InterpTerms out;
    SidePair user_side = interp_side(U, Pu, batch_users, reg.lambda_1, reg.lambda_2,
                                     grads ? &(*grads)[roles.user_emb] : nullptr,
                                     grads ? &(*grads)[roles.user_protos] : nullptr);
    SidePair item_side = interp_side(T, Pt, batch_items, reg.lambda_3, reg.lambda_4,
                                     grads ? &(*grads)[roles.item_emb] : nullptr,
                                     grads ? &(*grads)[roles.item_protos] : nullptr);
    out.pu_to_u = user_side.proto_to_entity;
    out.u_to_pu = user_side.entity_to_proto;
    out.pt_to_t = item_side.proto_to_entity;
    out.t_to_pt = item_side.entity_to_proto;
    return out;
}

double l1_preference_norm(const Model& model, std::span<const int> batch_users, double weight,
                          Grads* grads) {
    const TensorRoles roles = model.roles();
    if (roles.connections < 0 || roles.user_emb < 0 || roles.user_protos < 0)
        throw std::invalid_argument("l1_preference_norm: model has no preference structure");
    if (batch_users.empty()) throw std::invalid_argument("l1_preference_norm: empty batch users");

    const auto tensors = model.tensors();
    const Matrix& U = *tensors[roles.user_emb];
    const Matrix& Pu = *tensors[roles.user_protos];
    const Matrix& W = *tensors[roles.connections];
    const int lu = W.rows(), lt = W.cols();
    const double inv = 1.0 / static_cast<double>(batch_users.size());

    double value = 0.0;
    for (int u : batch_users) {
        SimDetail det = similarity_detail(U.row(u), Pu);
        std::vector<double> r(lt, 0.0);
        for (int i = 0; i < lu; ++i)
            for (int j = 0; j < lt; ++j) r[j] += W(i, j) * det.sim[i];
        std::vector<double> sgn(lt);
        for (int j = 0; j < lt; ++j) {
            value += std::abs(r[j]) * inv;
            sgn[j] = r[j] > 0.0 ? 1.0 : (r[j] < 0.0 ? -1.0 : 0.0);
        }
        if (!grads || weight == 0.0) continue;
        Matrix& gW = (*grads)[roles.connections];
        std::vector<double> g_sim(lu, 0.0);
        for (int i = 0; i < lu; ++i) {
            double acc = 0.0;
            for (int j = 0; j < lt; ++j) {
                gW(i, j) += weight * inv * det.sim[i] * sgn[j];
                acc += W(i, j) * sgn[j];
            }
            g_sim[i] = weight * inv * acc;
        }
        auto x = U.row(u);
        for (int i = 0; i < lu; ++i) {
            if (g_sim[i] == 0.0) continue;
            add_shifted_cosine_grad(x, Pu.row(i), det.dot[i], det.x_norm, det.p_norm[i], g_sim[i],
                                    (*grads)[roles.user_emb].row(u), (*grads)[roles.user_protos].row(i));
        }
    }
    return value;
}

LossReport total_loss(const Model& model, const Batch& batch, const RegWeights& reg,
                      BaseLoss base_kind, bool l2_squared, Grads* grads) {
    reg.validate();
    LossReport rep;
    switch (base_kind) {
        case BaseLoss::BCE: rep.base = bce_loss(model, batch, grads); break;
        case BaseLoss::BPR: rep.base = bpr_loss(model, batch, grads); break;
        case BaseLoss::SSM: rep.base = ssm_loss(model, batch, grads); break;
    }
    if (reg.lambda_l2 > 0.0) rep.l2 = l2_penalty(model, l2_squared, reg.lambda_l2, grads);

    const TensorRoles roles = model.roles();
    const bool has_protos = roles.user_protos >= 0 && roles.item_protos >= 0 &&
                            roles.user_emb >= 0 && roles.item_emb >= 0;
    if (has_protos &&
        (reg.lambda_1 > 0.0 || reg.lambda_2 > 0.0 || reg.lambda_3 > 0.0 || reg.lambda_4 > 0.0)) {
        InterpTerms terms = interpretability_terms(model, batch.users, batch.items, reg, grads);
        rep.reg_pu_to_u = terms.pu_to_u;
        rep.reg_u_to_pu = terms.u_to_pu;
        rep.reg_pt_to_t = terms.pt_to_t;
        rep.reg_t_to_pt = terms.t_to_pt;
    }
    if (roles.connections >= 0 && reg.lambda_l1 > 0.0)
        rep.l1_pref = l1_preference_norm(model, batch.users, reg.lambda_l1, grads);

    rep.total = rep.base + reg.lambda_l2 * rep.l2 + reg.lambda_1 * rep.reg_pu_to_u +
                reg.lambda_2 * rep.reg_u_to_pu + reg.lambda_3 * rep.reg_pt_to_t +
                reg.lambda_4 * rep.reg_t_to_pt + reg.lambda_l1 * rep.l1_pref;
    return rep;
}

}  // namespace uipc
