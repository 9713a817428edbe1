#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "uipc/model.hpp"
#include "uipc/rng.hpp"

namespace uipc {

struct RawInteraction {
    std::string user_key;
    std::string item_key;
    std::optional<double> rating;
    std::int64_t timestamp = 0;
};

struct IngestSchema {
    std::string delimiter = "\t";
    int user_col = 0;
    int item_col = 1;
    int rating_col = 2;  // -1: no rating column in the file
    int time_col = 3;
    bool has_header = false;
};

// Reads a delimited interaction log. When positive_threshold is set, rows
// whose rating is not strictly above it are dropped ("above" per the usual
// positive-interaction convention); without a threshold, rating-free rows
// pass through. Malformed rows fail fast with their line number.
std::vector<RawInteraction> ingest(const std::string& path, const IngestSchema& schema,
                                   std::optional<double> positive_threshold);

struct Interaction {
    int user = 0;
    int item = 0;
    std::int64_t timestamp = 0;

    bool operator==(const Interaction&) const = default;
};

struct Dataset {
    int n_users = 0;
    int n_items = 0;
    std::vector<std::string> user_keys;  // dense index -> raw key
    std::vector<std::string> item_keys;
    std::unordered_map<std::string, int> user_index;  // raw key -> dense index
    std::unordered_map<std::string, int> item_index;
    std::vector<Interaction> interactions;  // input order, deduplicated
};

// Deduplicates (user, item) pairs keeping the earliest timestamp, then
// iteratively removes users with < user_core and items with < item_core
// distinct interactions until a fixed point, and densely renumbers the
// survivors by first appearance. Throws if nothing survives.
Dataset k_core_filter(const std::vector<RawInteraction>& rows, int user_core, int item_core);

inline constexpr int kEvalNegatives = 99;

struct EvalExample {
    int user = 0;
    int item = 0;
    std::int64_t timestamp = 0;
    std::vector<int> negatives;  // exactly kEvalNegatives items
};

struct SplitBundle {
    std::vector<Interaction> train;
    std::vector<EvalExample> validation;
    std::vector<EvalExample> test;
};

// Leave-one-out: per user with >= 3 interactions, the latest (by timestamp,
// ties by input order) goes to test, the second latest to validation, the
// rest to train; users with fewer interactions contribute train rows only.
// Each evaluation pair gets 99 negatives sampled uniformly without
// replacement from the items that user never interacted with, independently
// per stage, from (seed, stage, user)-derived streams.
SplitBundle leave_one_out_split(const Dataset& dataset, std::uint64_t seed);

struct PopularityTable {
    std::vector<std::int64_t> counts;   // per item, train occurrences
    std::vector<double> cumulative;     // cumulative probabilities; back() == 1

    static PopularityTable from_train(std::span<const Interaction> train, int n_items);
    int sample(Rng& rng) const;
};

enum class SamplingMode { Uniform, Popular };

std::string to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(std::string_view name);

// Per positive, n_neg draws from the item catalog under the mode's
// distribution, redrawing any item in the owning user's train-positive set.
// user_train_items must hold each user's sorted train items.
std::vector<std::vector<int>> sample_train_negatives(
    std::span<const ScoredPair> positives, int n_neg, SamplingMode mode,
    const PopularityTable* popularity, int n_items,
    const std::vector<std::vector<int>>& user_train_items, Rng& rng);

// Everything the trainer and evaluator need, either assembled in memory or
// loaded back from a prepared directory.
struct PreparedData {
    int n_users = 0;
    int n_items = 0;
    std::vector<std::string> user_keys;
    std::vector<std::string> item_keys;
    std::vector<Interaction> train;
    std::vector<EvalExample> validation;
    std::vector<EvalExample> test;
    std::string fingerprint;  // of the id map; ties checkpoints to their dataset

    std::vector<std::vector<int>> user_train_items;  // sorted, derived

    void build_derived();
    static PreparedData from_parts(const Dataset& dataset, SplitBundle splits);
};

// train.tsv / valid.tsv / test.tsv / negatives.tsv / idmap.tsv
void write_split_files(const std::string& dir, const Dataset& dataset, const SplitBundle& splits);
PreparedData load_prepared(const std::string& dir);

// Fingerprint of an id map as serialized to idmap.tsv.
std::string idmap_fingerprint(const std::vector<std::string>& user_keys,
                              const std::vector<std::string>& item_keys);

}  // namespace uipc
