#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uipc/trainer.hpp"

namespace uipc {

// Flat `key = value` file: one assignment per line, '#' comments, optional
// quotes around values. Order is preserved (the search space relies on it).
std::vector<std::pair<std::string, std::string>> parse_flat_file(const std::string& path);

// Documented key set (mirrors the usual hyperparameter table rows):
//   embedding_size, lambda_l2, base_loss, sampling, neg_samples, batch_size,
//   optimizer, lr, user_prototypes, item_prototypes, lambda_1..lambda_4,
//   lambda_l1, max_epochs, patience, seed, l2_squared, log_every
void apply_config_entry(TrainConfig& config, const std::string& key, const std::string& value);

TrainConfig config_from_file(const std::string& path, TrainConfig defaults = {});

void write_config_file(const std::string& path, const TrainConfig& config);

nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

}  // namespace uipc
