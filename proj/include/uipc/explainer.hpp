#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uipc/dataset.hpp"
#include "uipc/model.hpp"

namespace uipc {

struct SupportingItem {
    int item = 0;
    double similarity = 0.0;  // shifted cosine to the prototype
    std::int64_t occurrences = 0;
};

// Faithful decomposition of one recommendation: the listed prototype scores
// sum exactly to the model logit.
struct ExplanationRecord {
    int user = 0;
    int item = 0;
    ScoreBreakdown breakdown;
    std::vector<std::pair<int, double>> top_prototypes;        // (item-prototype, s_j), by |s_j| desc
    std::vector<std::vector<SupportingItem>> supporting_items; // aligned with top_prototypes
};

struct PrototypeProfile {
    int prototype = 0;
    std::vector<SupportingItem> nearest_items;  // similarity descending, ties by index
};

struct PreferenceDistribution {
    int prototype = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    bool all_same_sign = false;  // min * max > 0
};

// Inclusive linear-interpolation quantile of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

class Explainer {
public:
    Explainer(const UipcModel& model, const PreparedData& data);

    // Prototypes ranked by |s_j| (negative contributions explain too); per
    // selected prototype, the user's train items nearest to it.
    ExplanationRecord explain_pair(int user, int item, int top_n, int items_per_prototype = 10) const;

    PrototypeProfile nearest_items(int prototype, int top_n) const;

    // Per item prototype, quartiles of the preference value r_j over all users.
    std::vector<PreferenceDistribution> preference_distribution() const;

private:
    const UipcModel& model_;
    const PreparedData& data_;
    std::vector<std::int64_t> occurrences_;  // train occurrences per item
};

// Fills {items}, {prototype}, {user} and {item} in the template from the
// record's dominant prototype; unknown placeholders are an error. An empty
// supporting list falls back to naming the prototype.
std::string render_rationale(const ExplanationRecord& record, const std::string& tmpl,
                             const std::function<std::string(int)>& item_name,
                             const std::function<std::string(int)>& user_name);

}  // namespace uipc
