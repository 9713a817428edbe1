#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uipc/dataset.hpp"
#include "uipc/synth.hpp"

namespace uipc {

// Subcommand implementations behind the CLI front end; each throws on
// failure (the binary maps exceptions to a nonzero exit) and writes a
// run_manifest.json into its output directory.

struct PrepareArgs {
    std::string input;
    std::string out_dir = "prepared";
    IngestSchema schema;
    std::optional<double> threshold;
    int user_core = 1;
    int item_core = 1;
    std::uint64_t seed = 42;
    bool quiet = false;
};
void cmd_prepare(const PrepareArgs& args);

struct TrainArgs {
    std::string data_dir;
    std::string out_dir = "run";
    std::string config_path;          // optional flat config file
    std::string model = "uipc-mf-l1"; // mf | acf | protomf | uipc-mf | uipc-mf-l1
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};
void cmd_train(const TrainArgs& args);

struct EvaluateArgs {
    std::string checkpoint_dir;
    std::string data_dir;
    std::string out_dir = "eval";
    std::string stage = "test";  // validation | test
    std::vector<int> cutoffs = {5, 10};
    bool quiet = false;
};
void cmd_evaluate(const EvaluateArgs& args);

struct ExplainArgs {
    std::string checkpoint_dir;
    std::string data_dir;
    std::string out_dir = "explain";
    std::string user_key, item_key;  // both set: per-pair explanation
    int top = 5;
    int items_per_prototype = 10;
    int prototype = -1;   // >= 0: nearest-items profile
    bool pref_dist = false;
    std::string metadata_path;  // optional sidecar: item key + display columns
    std::string rationale_template =
        "Other listeners who have listened to {items} also enjoyed the item we are recommending.";
    bool quiet = false;
};
void cmd_explain(const ExplainArgs& args);

struct SearchArgs {
    std::string data_dir;
    std::string out_dir = "search";
    std::string space_path;
    std::string config_path;  // optional base config
    std::string model = "uipc-mf-l1";
    int trials = 10;
    std::uint64_t seed = 42;
    int parallel = 1;
    bool quiet = false;
};
void cmd_search(const SearchArgs& args);

struct SynthArgs {
    SynthConfig config;
    std::string out_dir = "synth";
    bool quiet = false;
};
void cmd_synth(const SynthArgs& args);

// "uipc-mf" trains the architecture with the L1 preference term disabled;
// "uipc-mf-l1" keeps the configured lambda_l1.
struct ModelSelection {
    ModelKind kind;
    bool force_l1_zero = false;
    std::string name;
};
ModelSelection parse_model_selection(const std::string& name);

}  // namespace uipc
