#pragma once

#include <functional>
#include <limits>
#include <memory>

#include "uipc/dataset.hpp"
#include "uipc/losses.hpp"
#include "uipc/optimizer.hpp"

namespace uipc {

struct TrainConfig {
    BaseLoss base_loss = BaseLoss::SSM;
    int n_neg = 4;
    int batch_size = 256;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    int max_epochs = 100;
    int patience = 10;
    RegWeights reg;
    SamplingMode sampling = SamplingMode::Uniform;
    std::uint64_t seed = 42;
    int dim = 32;
    int n_user_protos = 8;
    int n_item_protos = 8;
    bool l2_squared = true;
    int log_every = 100;  // step-level loss rows; 0 disables

    void validate() const;
};

struct EpochStats {
    int epoch = 0;        // 1-based
    LossReport mean;      // batch-mean of the step reports
    double val_hr10 = 0.0;
    double val_ndcg10 = 0.0;
    double wall_ms = 0.0;
    bool is_best = false;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;  // 1-based
    double best_hr10 = 0.0;
};

// Tracks the best validation metric; improvement must be strict.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience);
    bool observe(double metric);  // returns true when this epoch improved
    bool should_stop() const { return since_improvement_ >= patience_; }
    int best_index() const { return best_index_; }  // 1-based observation index
    double best_metric() const { return best_; }

private:
    int patience_;
    int since_improvement_ = 0;
    int observed_ = 0;
    int best_index_ = 0;
    double best_ = -std::numeric_limits<double>::infinity();
};

using StepCallback = std::function<void(int epoch, int step, const LossReport&)>;

struct TrainResult {
    std::unique_ptr<Model> model;  // parameters restored to the best epoch
    TrainLog log;
};

// Mini-batch training with per-epoch shuffling, fresh negatives every epoch,
// validation HR@10 selection and early stopping. Deterministic given
// (data, kind, config).
TrainResult train(const PreparedData& data, ModelKind kind, const TrainConfig& config,
                  const StepCallback& on_step = {});

}  // namespace uipc
