#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uipc/trainer.hpp"

namespace uipc {

// One searchable hyperparameter. Range syntax in the space file:
//   lr = loguniform(1e-4, 1e-1)
//   embedding_size = int(16, 128)
//   lambda_l1 = loguniform(1e-4, 1e-1)
//   base_loss = choice(bce, bpr, ssm)
//   batch_size = uniform(64, 512)        # real-valued, rounded by the key
//   optimizer = adagrad                  # fixed literal
struct ParamSpec {
    enum class Kind { LogUniform, Uniform, IntRange, Choice, Fixed };
    Kind kind = Kind::Fixed;
    double lo = 0.0, hi = 0.0;
    std::vector<std::string> choices;
    std::string value;

    std::string sample(Rng& rng) const;  // rendered value for apply_config_entry
};

using SearchSpace = std::vector<std::pair<std::string, ParamSpec>>;

SearchSpace parse_search_space(const std::string& path);
ParamSpec parse_param_spec(const std::string& text);

TrainConfig sample_config(const SearchSpace& space, TrainConfig base, Rng& rng);

struct TrialOutcome {
    int trial = 0;
    TrainConfig config;
    double val_hr10 = 0.0;
    double val_ndcg10 = 0.0;
    int best_epoch = 0;
};

// Samples n_trials configs from the space (trial seeds and draws derived
// from `seed`), trains each, and returns outcomes ranked by validation
// HR@10 (ties by trial index). `parallel` trains trials on worker threads;
// results do not depend on the worker count.
std::vector<TrialOutcome> random_search(const PreparedData& data, ModelKind kind,
                                        const TrainConfig& base, const SearchSpace& space,
                                        int n_trials, std::uint64_t seed, int parallel = 1);

}  // namespace uipc
