#include "uipc/trainer.hpp"

#include <chrono>
#include <numeric>
#include <stdexcept>

#include "uipc/evaluator.hpp"

namespace uipc {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (patience < 1) throw std::invalid_argument("config: patience must be >= 1");
    if (n_neg < 1) throw std::invalid_argument("config: neg_samples must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("config: max_epochs must be >= 1");
    if (dim < 1) throw std::invalid_argument("config: embedding_size must be >= 1");
    if (n_user_protos < 1) throw std::invalid_argument("config: user_prototypes must be >= 1");
    if (n_item_protos < 1) throw std::invalid_argument("config: item_prototypes must be >= 1");
    if (log_every < 0) throw std::invalid_argument("config: log_every must be >= 0");
    reg.validate();
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
    if (patience < 1) throw std::invalid_argument("EarlyStopper: patience must be >= 1");
}

bool EarlyStopper::observe(double metric) {
    ++observed_;
    if (metric > best_) {
        best_ = metric;
        best_index_ = observed_;
        since_improvement_ = 0;
        return true;
    }
    ++since_improvement_;
    return false;
}

TrainResult train(const PreparedData& data, ModelKind kind, const TrainConfig& config,
                  const StepCallback& on_step) {
    config.validate();
    if (data.train.empty()) throw std::invalid_argument("train: empty train split");
    if (data.validation.empty()) throw std::invalid_argument("train: empty validation split");

    Rng init_rng(derive_seed(config.seed, "init"));
    std::unique_ptr<Model> model = create_model(kind, data.n_users, data.n_items,
                                                config.n_user_protos, config.n_item_protos,
                                                config.dim, init_rng);
    auto optimizer = Optimizer::make(config.optimizer, config.learning_rate, *model);
    Grads grads = model->zero_grads();
    auto params = model->tensors();

    PopularityTable popularity;
    if (config.sampling == SamplingMode::Popular)
        popularity = PopularityTable::from_train(data.train, data.n_items);

    std::vector<ScoredPair> train_pairs;
    train_pairs.reserve(data.train.size());
    for (const auto& it : data.train) train_pairs.push_back({it.user, it.item});

    const int val_cutoff[] = {10};
    EarlyStopper stopper(config.patience);
    std::vector<Matrix> best_params = model->snapshot();
    TrainLog log;

    std::vector<std::size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        Rng neg_rng(derive_seed(config.seed, "train-negatives", static_cast<std::uint64_t>(epoch)));

        LossReport epoch_sum;
        int steps = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            std::vector<ScoredPair> positives;
            positives.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) positives.push_back(train_pairs[order[k]]);
            auto negatives = sample_train_negatives(
                positives, config.n_neg, config.sampling,
                config.sampling == SamplingMode::Popular ? &popularity : nullptr, data.n_items,
                data.user_train_items, neg_rng);
            Batch batch = Batch::make(std::move(positives), std::move(negatives));

            for (auto& g : grads) g.fill(0.0);
            LossReport rep = total_loss(*model, batch, config.reg, config.base_loss,
                                        config.l2_squared, &grads);
            if (!rep.all_finite())
                throw std::runtime_error("non-finite loss term '" + rep.first_non_finite() +
                                         "' at epoch " + std::to_string(epoch) + ", step " +
                                         std::to_string(steps + 1));
            optimizer->step(params, grads);

            ++steps;
            epoch_sum.base += rep.base;
            epoch_sum.l2 += rep.l2;
            epoch_sum.reg_pu_to_u += rep.reg_pu_to_u;
            epoch_sum.reg_u_to_pu += rep.reg_u_to_pu;
            epoch_sum.reg_pt_to_t += rep.reg_pt_to_t;
            epoch_sum.reg_t_to_pt += rep.reg_t_to_pt;
            epoch_sum.l1_pref += rep.l1_pref;
            epoch_sum.total += rep.total;
            if (on_step && config.log_every > 0 && (steps - 1) % config.log_every == 0)
                on_step(epoch, steps, rep);
        }

        MetricsReport val = evaluate(*model, data.validation, val_cutoff);

        EpochStats stats;
        stats.epoch = epoch;
        const double inv = 1.0 / std::max(1, steps);
        stats.mean.base = epoch_sum.base * inv;
        stats.mean.l2 = epoch_sum.l2 * inv;
        stats.mean.reg_pu_to_u = epoch_sum.reg_pu_to_u * inv;
        stats.mean.reg_u_to_pu = epoch_sum.reg_u_to_pu * inv;
        stats.mean.reg_pt_to_t = epoch_sum.reg_pt_to_t * inv;
        stats.mean.reg_t_to_pt = epoch_sum.reg_t_to_pt * inv;
        stats.mean.l1_pref = epoch_sum.l1_pref * inv;
        stats.mean.total = epoch_sum.total * inv;
        stats.val_hr10 = val.hr_at(10);
        stats.val_ndcg10 = val.ndcg_at(10);
        stats.is_best = stopper.observe(stats.val_hr10);
        if (stats.is_best) best_params = model->snapshot();
        stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        log.epochs.push_back(stats);

        if (stopper.should_stop()) break;
    }

    model->restore(best_params);
    log.best_epoch = stopper.best_index();
    log.best_hr10 = stopper.best_metric();
    return {std::move(model), std::move(log)};
}

}  // namespace uipc
