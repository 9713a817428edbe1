#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uipc/dataset.hpp"
#include "uipc/model.hpp"

namespace uipc {

// Planted block model: user u interacts with item t with probability p_in
// when they share a group, p_out otherwise. Timestamps are a random
// permutation so the leave-one-out holdout is a uniform draw per user.
struct SynthConfig {
    int n_groups = 5;
    int users_per_group = 100;
    int items_per_group = 40;
    double p_in = 0.3;
    double p_out = 0.01;
    std::uint64_t seed = 42;

    void validate() const;
};

struct SynthData {
    Dataset dataset;
    std::vector<int> user_groups;  // aligned with dataset user indices
    std::vector<int> item_groups;
    int dropped_users = 0;  // empty after one resample, removed
};

SynthData generate(const SynthConfig& config);

struct BlockScore {
    double score = 0.0;            // fraction of assignable user prototypes whose
                                   // strongest |w| lands on a same-group item prototype
    int assigned = 0;
    int excluded = 0;              // prototypes with no assignable group
    std::vector<int> user_proto_group;
    std::vector<int> item_proto_group;
};

// Assigns each prototype to the group with the highest mean shifted cosine
// to that group's member embeddings (ties to the lowest group index), then
// checks whether each user prototype's largest-|w| connection lands on an
// item prototype of the same group.
BlockScore block_structure_score(const UipcModel& model, std::span<const int> user_groups,
                                 std::span<const int> item_groups);

// labels.tsv: entity kind, dense index, group
void write_labels_file(const std::string& dir, const SynthData& data);

}  // namespace uipc
