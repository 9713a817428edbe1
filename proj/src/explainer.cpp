#include "uipc/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uipc {

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Explainer::Explainer(const UipcModel& model, const PreparedData& data)
    : model_(model), data_(data) {
    occurrences_.assign(data.n_items, 0);
    for (const auto& it : data.train) ++occurrences_[it.item];
}

ExplanationRecord Explainer::explain_pair(int user, int item, int top_n,
                                          int items_per_prototype) const {
    if (top_n < 1) throw std::invalid_argument("explain_pair: top_n must be >= 1");
    model_.check_user(user);
    model_.check_item(item);

    ExplanationRecord rec;
    rec.user = user;
    rec.item = item;
    rec.breakdown = model_.breakdown(user, item);

    const int lt = model_.n_item_protos();
    std::vector<int> order(lt);
    for (int j = 0; j < lt; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = std::abs(rec.breakdown.prototype_scores[a]);
        const double mb = std::abs(rec.breakdown.prototype_scores[b]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    const int take = std::min(top_n, lt);

    const auto& train_items = data_.user_train_items[user];
    for (int k = 0; k < take; ++k) {
        const int proto = order[k];
        rec.top_prototypes.emplace_back(proto, rec.breakdown.prototype_scores[proto]);

        std::vector<SupportingItem> support;
        support.reserve(train_items.size());
        for (int t : train_items) {
            const double sim = shifted_cosine(model_.item_emb.row(t), model_.item_protos.row(proto));
            support.push_back({t, sim, occurrences_[t]});
        }
        std::stable_sort(support.begin(), support.end(), [](const auto& a, const auto& b) {
            if (a.similarity != b.similarity) return a.similarity > b.similarity;
            return a.item < b.item;
        });
        if (static_cast<int>(support.size()) > items_per_prototype)
            support.resize(items_per_prototype);
        rec.supporting_items.push_back(std::move(support));
    }
    return rec;
}

PrototypeProfile Explainer::nearest_items(int prototype, int top_n) const {
    if (prototype < 0 || prototype >= model_.n_item_protos())
        throw std::out_of_range("nearest_items: prototype index out of range");
    if (top_n < 1) throw std::invalid_argument("nearest_items: top_n must be >= 1");

    PrototypeProfile prof;
    prof.prototype = prototype;
    prof.nearest_items.reserve(model_.n_items());
    for (int t = 0; t < model_.n_items(); ++t) {
        const double sim = shifted_cosine(model_.item_emb.row(t), model_.item_protos.row(prototype));
        prof.nearest_items.push_back({t, sim, occurrences_[t]});
    }
    std::stable_sort(prof.nearest_items.begin(), prof.nearest_items.end(),
                     [](const auto& a, const auto& b) {
                         if (a.similarity != b.similarity) return a.similarity > b.similarity;
                         return a.item < b.item;
                     });
    if (static_cast<int>(prof.nearest_items.size()) > top_n) prof.nearest_items.resize(top_n);
    return prof;
}

std::vector<PreferenceDistribution> Explainer::preference_distribution() const {
    const int lt = model_.n_item_protos();
    const int n = model_.n_users();
    std::vector<std::vector<double>> values(lt, std::vector<double>(n));
    for (int u = 0; u < n; ++u) {
        auto r = model_.preference_vector(u);
        for (int j = 0; j < lt; ++j) values[j][u] = r[j];
    }
    std::vector<PreferenceDistribution> out(lt);
    for (int j = 0; j < lt; ++j) {
        auto& v = values[j];
        std::sort(v.begin(), v.end());
        out[j].prototype = j;
        out[j].min = v.front();
        out[j].q1 = quantile_sorted(v, 0.25);
        out[j].median = quantile_sorted(v, 0.5);
        out[j].q3 = quantile_sorted(v, 0.75);
        out[j].max = v.back();
        out[j].all_same_sign = out[j].min * out[j].max > 0.0;
    }
    return out;
}

std::string render_rationale(const ExplanationRecord& record, const std::string& tmpl,
                             const std::function<std::string(int)>& item_name,
                             const std::function<std::string(int)>& user_name) {
    if (record.top_prototypes.empty())
        throw std::invalid_argument("render_rationale: record has no prototypes");

    const int proto = record.top_prototypes.front().first;
    std::string items_text;
    if (record.supporting_items.empty() || record.supporting_items.front().empty()) {
        items_text = "item prototype " + std::to_string(proto);
    } else {
        const auto& support = record.supporting_items.front();
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (i) items_text += i + 1 == support.size() ? " and " : ", ";
            items_text += item_name(support[i].item);
        }
    }

    std::string out;
    out.reserve(tmpl.size() + items_text.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] != '{') {
            out += tmpl[i++];
            continue;
        }
        const std::size_t close = tmpl.find('}', i);
        if (close == std::string::npos)
            throw std::invalid_argument("render_rationale: unterminated placeholder");
        const std::string name = tmpl.substr(i + 1, close - i - 1);
        if (name == "items") out += items_text;
        else if (name == "prototype") out += std::to_string(proto);
        else if (name == "item") out += item_name(record.item);
        else if (name == "user") out += user_name(record.user);
        else throw std::invalid_argument("render_rationale: unknown placeholder '{" + name + "}'");
        i = close + 1;
    }
    return out;
}

}  // namespace uipc
