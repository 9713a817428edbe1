#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "uipc/config.hpp"
#include "uipc/search.hpp"

using namespace uipc;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("a published hyperparameter column transcribes directly") {
    const auto path = write_temp("uipc_cfg_ml1m.toml",
                                 "# ML-1M best column\n"
                                 "embedding_size = 33\n"
                                 "lambda_l2 = 0.00134173\n"
                                 "base_loss = ssm\n"
                                 "sampling = uniform\n"
                                 "neg_samples = 37\n"
                                 "batch_size = 124\n"
                                 "optimizer = adagrad\n"
                                 "lr = 0.0226839\n"
                                 "user_prototypes = 84\n"
                                 "item_prototypes = 95\n"
                                 "lambda_1 = 0.0153054\n"
                                 "lambda_2 = 0.0134081\n"
                                 "lambda_3 = 0.188699\n"
                                 "lambda_4 = 1.322822\n"
                                 "lambda_l1 = 0.00318446\n");
    TrainConfig cfg = config_from_file(path);
    CHECK(cfg.dim == 33);
    CHECK(cfg.base_loss == BaseLoss::SSM);
    CHECK(cfg.sampling == SamplingMode::Uniform);
    CHECK(cfg.n_neg == 37);
    CHECK(cfg.batch_size == 124);
    CHECK(cfg.optimizer == OptimizerKind::Adagrad);
    CHECK(cfg.learning_rate == doctest::Approx(0.0226839));
    CHECK(cfg.n_user_protos == 84);
    CHECK(cfg.n_item_protos == 95);
    CHECK(cfg.reg.lambda_4 == doctest::Approx(1.322822));
    CHECK(cfg.reg.lambda_l1 == doctest::Approx(0.00318446));
    // untouched keys keep their defaults
    CHECK(cfg.max_epochs == 100);
    CHECK(cfg.patience == 10);
}

TEST_CASE("unknown keys and malformed values are rejected") {
    TrainConfig cfg;
    CHECK_THROWS_WITH_AS(apply_config_entry(cfg, "embeding_size", "33"),
                         doctest::Contains("embeding_size"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_entry(cfg, "lr", "fast"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_entry(cfg, "base_loss", "hinge"), std::invalid_argument);

    const auto path = write_temp("uipc_cfg_bad.toml", "lr 0.1\n");
    CHECK_THROWS_WITH_AS(config_from_file(path), doctest::Contains(":1"), std::runtime_error);
}

TEST_CASE("config files round-trip") {
    TrainConfig cfg;
    cfg.dim = 48;
    cfg.learning_rate = 0.0123456789;
    cfg.base_loss = BaseLoss::BPR;
    cfg.optimizer = OptimizerKind::Adagrad;
    cfg.reg.lambda_l1 = 1e-4;
    cfg.seed = 1234;
    cfg.l2_squared = false;
    const auto path = (std::filesystem::temp_directory_path() / "uipc_cfg_rt.toml").string();
    write_config_file(path, cfg);
    TrainConfig back = config_from_file(path);
    CHECK(back.dim == cfg.dim);
    CHECK(back.learning_rate == cfg.learning_rate);
    CHECK(back.base_loss == cfg.base_loss);
    CHECK(back.optimizer == cfg.optimizer);
    CHECK(back.reg.lambda_l1 == cfg.reg.lambda_l1);
    CHECK(back.seed == cfg.seed);
    CHECK(back.l2_squared == cfg.l2_squared);
}

TEST_CASE("json round-trip preserves exact doubles") {
    TrainConfig cfg;
    cfg.learning_rate = 0.1 + 0.2;  // not representable "nicely"
    cfg.reg.lambda_3 = 1.0 / 3.0;
    nlohmann::json j = config_to_json(cfg);
    TrainConfig back = config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.learning_rate == cfg.learning_rate);
    CHECK(back.reg.lambda_3 == cfg.reg.lambda_3);
}

TEST_CASE("search space parsing") {
    const auto path = write_temp("uipc_space.toml",
                                 "lr = loguniform(1e-4, 1e-1)\n"
                                 "embedding_size = int(16, 128)\n"
                                 "base_loss = choice(bce, bpr, ssm)\n"
                                 "batch_size = uniform(64, 512)\n"
                                 "optimizer = adagrad\n");
    SearchSpace space = parse_search_space(path);
    REQUIRE(space.size() == 5);
    CHECK(space[0].second.kind == ParamSpec::Kind::LogUniform);
    CHECK(space[1].second.kind == ParamSpec::Kind::IntRange);
    CHECK(space[2].second.kind == ParamSpec::Kind::Choice);
    CHECK(space[2].second.choices.size() == 3);
    CHECK(space[3].second.kind == ParamSpec::Kind::Uniform);
    CHECK(space[4].second.kind == ParamSpec::Kind::Fixed);

    CHECK_THROWS_AS(parse_param_spec("loguniform(-1, 2)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_param_spec("int(5, 2)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_param_spec("gamma(1, 2)"), std::invalid_argument);
}

TEST_CASE("sampled configs stay inside their declared ranges") {
    SearchSpace space = {{"lr", parse_param_spec("loguniform(1e-4, 1e-1)")},
                         {"embedding_size", parse_param_spec("int(16, 64)")},
                         {"base_loss", parse_param_spec("choice(bce, ssm)")}};
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        TrainConfig cfg = sample_config(space, {}, rng);
        CHECK(cfg.learning_rate >= 1e-4);
        CHECK(cfg.learning_rate <= 1e-1);
        CHECK(cfg.dim >= 16);
        CHECK(cfg.dim <= 64);
        CHECK((cfg.base_loss == BaseLoss::BCE || cfg.base_loss == BaseLoss::SSM));
    }
}
