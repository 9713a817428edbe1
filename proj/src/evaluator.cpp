#include "uipc/evaluator.hpp"

#include <cmath>
#include <stdexcept>

namespace uipc {

double MetricsReport::hr_at(int k) const {
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        if (cutoffs[i] == k) return hr[i];
    throw std::invalid_argument("cutoff not evaluated: " + std::to_string(k));
}

double MetricsReport::ndcg_at(int k) const {
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        if (cutoffs[i] == k) return ndcg[i];
    throw std::invalid_argument("cutoff not evaluated: " + std::to_string(k));
}

int rank_true_item(const Scorer& scorer, int user, int true_item, std::span<const int> negatives) {
    const double true_score = scorer.score(user, true_item);
    int rank = 1;
    for (int n : negatives) {
        const double s = scorer.score(user, n);
        if (s >= true_score) ++rank;  // strictly-above plus exact ties
    }
    return rank;
}

double hit_ratio(std::span<const int> ranks, int k) {
    if (ranks.empty()) throw std::invalid_argument("hit_ratio: empty rank list");
    std::size_t hits = 0;
    for (int r : ranks)
        if (r <= k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double ndcg(std::span<const int> ranks, int k) {
    if (ranks.empty()) throw std::invalid_argument("ndcg: empty rank list");
    double acc = 0.0;
    for (int r : ranks)
        if (r <= k) acc += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    return acc / static_cast<double>(ranks.size());
}

MetricsReport evaluate(const Scorer& scorer, std::span<const EvalExample> examples,
                       std::span<const int> cutoffs) {
    if (examples.empty()) throw std::invalid_argument("evaluate: no evaluation examples");
    for (int k : cutoffs)
        if (k < 1 || k > kEvalNegatives + 1)
            throw std::invalid_argument("evaluate: cutoff " + std::to_string(k) +
                                        " outside [1, " + std::to_string(kEvalNegatives + 1) + "]");

    MetricsReport rep;
    rep.cutoffs.assign(cutoffs.begin(), cutoffs.end());
    rep.users.reserve(examples.size());
    rep.ranks.reserve(examples.size());
    for (const auto& ex : examples) {
        if (ex.negatives.size() != kEvalNegatives)
            throw std::invalid_argument("evaluate: user " + std::to_string(ex.user) + " has " +
                                        std::to_string(ex.negatives.size()) + " negatives, expected " +
                                        std::to_string(kEvalNegatives));
        rep.users.push_back(ex.user);
        rep.ranks.push_back(rank_true_item(scorer, ex.user, ex.item, ex.negatives));
    }
    for (int k : cutoffs) {
        rep.hr.push_back(hit_ratio(rep.ranks, k));
        rep.ndcg.push_back(ndcg(rep.ranks, k));
    }
    return rep;
}

}  // namespace uipc
