#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "uipc/evaluator.hpp"
#include "uipc/synth.hpp"
#include "uipc/trainer.hpp"

using namespace uipc;

namespace {

PreparedData tiny_planted(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_groups = 3;
    cfg.users_per_group = 30;
    cfg.items_per_group = 50;
    cfg.p_in = 0.25;
    cfg.p_out = 0.02;
    cfg.seed = seed;
    SynthData data = generate(cfg);
    return PreparedData::from_parts(data.dataset, leave_one_out_split(data.dataset, seed));
}

TrainConfig fast_config() {
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.n_user_protos = 4;
    cfg.n_item_protos = 4;
    cfg.max_epochs = 3;
    cfg.patience = 10;
    cfg.batch_size = 128;
    cfg.n_neg = 4;
    cfg.learning_rate = 0.01;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("early stopper: flat metric stops after patience epochs, best stays first") {
    EarlyStopper stopper(10);
    CHECK(stopper.observe(0.5));  // epoch 1 improves over -inf
    for (int epoch = 2; epoch <= 11; ++epoch) {
        CHECK(!stopper.observe(0.5));  // ties are not improvements
        if (epoch < 11) CHECK(!stopper.should_stop());
    }
    CHECK(stopper.should_stop());
    CHECK(stopper.best_index() == 1);
}

TEST_CASE("early stopper tracks the best epoch") {
    EarlyStopper stopper(3);
    stopper.observe(0.1);
    stopper.observe(0.3);
    stopper.observe(0.2);
    stopper.observe(0.25);
    CHECK(stopper.best_index() == 2);
    CHECK(stopper.best_metric() == 0.3);
    CHECK(!stopper.should_stop());
    stopper.observe(0.2);
    CHECK(stopper.should_stop());
}

TEST_CASE("invalid configs are rejected up front") {
    TrainConfig cfg = fast_config();
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = fast_config();
    cfg.patience = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = fast_config();
    cfg.n_neg = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("training is bitwise deterministic") {
    PreparedData data = tiny_planted(3);
    TrainConfig cfg = fast_config();
    TrainResult a = train(data, ModelKind::UipcMF, cfg);
    TrainResult b = train(data, ModelKind::UipcMF, cfg);

    auto ta = a.model->snapshot();
    auto tb = b.model->snapshot();
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i] == tb[i]);
    REQUIRE(a.log.epochs.size() == b.log.epochs.size());
    for (std::size_t e = 0; e < a.log.epochs.size(); ++e) {
        CHECK(a.log.epochs[e].val_hr10 == b.log.epochs[e].val_hr10);
        CHECK(a.log.epochs[e].mean.total == b.log.epochs[e].mean.total);
    }
    CHECK(a.log.best_epoch == b.log.best_epoch);

    TrainConfig other = cfg;
    other.seed = 8;
    TrainResult c = train(data, ModelKind::UipcMF, other);
    CHECK(c.model->snapshot()[0] != ta[0]);
}

TEST_CASE("returned checkpoint reproduces the best validation HR@10") {
    PreparedData data = tiny_planted(4);
    TrainConfig cfg = fast_config();
    cfg.max_epochs = 5;
    TrainResult result = train(data, ModelKind::UipcMF, cfg);
    const int cutoffs[] = {10};
    MetricsReport rep = evaluate(*result.model, data.validation, cutoffs);
    CHECK(rep.hr_at(10) == result.log.best_hr10);
    for (const auto& e : result.log.epochs) CHECK(e.val_hr10 <= result.log.best_hr10);
}

TEST_CASE("repeated full-batch steps strictly decrease the total loss") {
    PreparedData data = tiny_planted(5);

    for (auto opt : {OptimizerKind::Adam, OptimizerKind::Adagrad}) {
        Rng rng(derive_seed(11, "init"));
        auto model = create_model(ModelKind::UipcMF, data.n_users, data.n_items, 4, 4, 8, rng);
        auto optimizer = Optimizer::make(opt, 1e-3, *model);
        Grads grads = model->zero_grads();
        auto params = model->tensors();

        // one fixed batch, resampled negatives frozen up front
        std::vector<ScoredPair> positives;
        for (int k = 0; k < 64; ++k)
            positives.push_back({data.train[k].user, data.train[k].item});
        Rng neg_rng(derive_seed(11, "neg"));
        auto negatives = sample_train_negatives(positives, 4, SamplingMode::Uniform, nullptr,
                                                data.n_items, data.user_train_items, neg_rng);
        Batch batch = Batch::make(std::move(positives), std::move(negatives));

        RegWeights reg;
        reg.lambda_l2 = 1e-4;
        double prev = total_loss(*model, batch, reg, BaseLoss::SSM, true, nullptr).total;
        for (int step = 0; step < 50; ++step) {
            for (auto& g : grads) g.fill(0.0);
            (void)total_loss(*model, batch, reg, BaseLoss::SSM, true, &grads);
            optimizer->step(params, grads);
            const double now = total_loss(*model, batch, reg, BaseLoss::SSM, true, nullptr).total;
            CHECK(now < prev);
            prev = now;
        }
    }
}

TEST_CASE("all model kinds run through the trainer") {
    PreparedData data = tiny_planted(6);
    TrainConfig cfg = fast_config();
    cfg.max_epochs = 2;
    for (auto kind : {ModelKind::MF, ModelKind::ACF, ModelKind::ProtoMF, ModelKind::UipcMF}) {
        TrainResult result = train(data, kind, cfg);
        CHECK(result.log.best_epoch >= 1);
        CHECK(result.model->kind() == kind);
    }
}

TEST_CASE("popular sampling mode trains") {
    PreparedData data = tiny_planted(7);
    TrainConfig cfg = fast_config();
    cfg.max_epochs = 2;
    cfg.sampling = SamplingMode::Popular;
    TrainResult result = train(data, ModelKind::UipcMF, cfg);
    CHECK(result.log.epochs.size() == 2);
}

TEST_CASE("step callback sees the configured cadence") {
    PreparedData data = tiny_planted(8);
    TrainConfig cfg = fast_config();
    cfg.max_epochs = 1;
    cfg.log_every = 2;
    int calls = 0;
    train(data, ModelKind::MF, cfg, [&](int, int step, const LossReport&) {
        ++calls;
        CHECK((step - 1) % 2 == 0);
    });
    CHECK(calls > 0);
}
