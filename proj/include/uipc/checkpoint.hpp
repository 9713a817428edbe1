#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "uipc/model.hpp"

namespace uipc {

// Checkpoint layout: manifest.json plus one flat binary file per tensor
// (row-major little-endian IEEE-754 doubles), file names fixed by tensor
// role. Save -> load round-trips bit-exactly.
void save_checkpoint(const std::string& dir, const Model& model, const nlohmann::json& extra);

struct LoadedCheckpoint {
    std::unique_ptr<Model> model;
    nlohmann::json manifest;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

}  // namespace uipc
