#pragma once

#include <span>
#include <vector>

#include "uipc/dataset.hpp"
#include "uipc/model.hpp"

namespace uipc {

struct MetricsReport {
    std::vector<int> cutoffs;
    std::vector<double> hr;    // aligned with cutoffs
    std::vector<double> ndcg;  // aligned with cutoffs
    std::vector<int> users;    // per eval example
    std::vector<int> ranks;    // per eval example, 1-based

    double hr_at(int k) const;
    double ndcg_at(int k) const;
};

// 1 + (# negatives scoring strictly above) + (# exact ties): ties count
// against the true item so reported metrics are deterministic lower bounds.
int rank_true_item(const Scorer& scorer, int user, int true_item, std::span<const int> negatives);

double hit_ratio(std::span<const int> ranks, int k);

// Single-relevant-item NDCG: mean of 1/log2(rank+1) for ranks within the
// cutoff (ideal DCG is 1, so this is already normalized).
double ndcg(std::span<const int> ranks, int k);

MetricsReport evaluate(const Scorer& scorer, std::span<const EvalExample> examples,
                       std::span<const int> cutoffs);

}  // namespace uipc
