#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "uipc/baselines.hpp"
#include "uipc/checkpoint.hpp"

using namespace uipc;

namespace {

std::string temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir.string();
}

void randomize(Model& m, std::uint64_t seed) {
    Rng rng(seed);
    for (Matrix* t : m.tensors())
        for (int r = 0; r < t->rows(); ++r)
            for (int c = 0; c < t->cols(); ++c)
                (*t)(r, c) = rng.normal(0.0, 1.0) * std::pow(10.0, double(rng.uniform_int(7)) - 3.0);
}

void check_bit_exact(const Model& a, const Model& b) {
    auto ta = a.tensors(), tb = b.tensors();
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);
}

}  // namespace

TEST_CASE("checkpoints round-trip bit-exactly for every model kind") {
    {
        MfModel m(7, 9, 5);
        randomize(m, 1);
        const auto dir = temp_dir("uipc_ckpt_mf");
        save_checkpoint(dir, m, {{"seed", 42}});
        auto loaded = load_checkpoint(dir);
        CHECK(loaded.model->kind() == ModelKind::MF);
        check_bit_exact(m, *loaded.model);
        CHECK(loaded.manifest.at("seed").get<int>() == 42);
    }
    {
        AcfModel m(6, 8, 3, 4);
        randomize(m, 2);
        const auto dir = temp_dir("uipc_ckpt_acf");
        save_checkpoint(dir, m, {});
        auto loaded = load_checkpoint(dir);
        check_bit_exact(m, *loaded.model);
    }
    {
        ProtoMfModel m(5, 6, 2, 3, 4);
        randomize(m, 3);
        const auto dir = temp_dir("uipc_ckpt_pmf");
        save_checkpoint(dir, m, {});
        auto loaded = load_checkpoint(dir);
        check_bit_exact(m, *loaded.model);
    }
    {
        UipcModel m(5, 6, 2, 3, 4);
        randomize(m, 4);
        const auto dir = temp_dir("uipc_ckpt_uipc");
        save_checkpoint(dir, m, {});
        auto loaded = load_checkpoint(dir);
        check_bit_exact(m, *loaded.model);
        const auto* u = dynamic_cast<const UipcModel*>(loaded.model.get());
        REQUIRE(u != nullptr);
        CHECK(u->n_user_protos() == 2);
        CHECK(u->n_item_protos() == 3);
    }
}

TEST_CASE("manifest records shapes and tensor files") {
    UipcModel m(4, 5, 2, 3, 6);
    randomize(m, 5);
    const auto dir = temp_dir("uipc_ckpt_manifest");
    save_checkpoint(dir, m, {{"dataset_fingerprint", "abc123"}});
    auto loaded = load_checkpoint(dir);
    CHECK(loaded.manifest.at("model_kind") == "uipc-mf");
    CHECK(loaded.manifest.at("n_users") == 4);
    CHECK(loaded.manifest.at("dim") == 6);
    CHECK(loaded.manifest.at("dataset_fingerprint") == "abc123");
    CHECK(loaded.manifest.at("tensors").size() == 5);
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / "connections.bin"));
}

TEST_CASE("loading a damaged checkpoint fails loudly") {
    UipcModel m(3, 3, 2, 2, 3);
    randomize(m, 6);
    const auto dir = temp_dir("uipc_ckpt_broken");
    save_checkpoint(dir, m, {});
    std::filesystem::resize_file(std::filesystem::path(dir) / "connections.bin", 8);
    CHECK_THROWS_AS(load_checkpoint(dir), std::runtime_error);

    CHECK_THROWS_AS(load_checkpoint(temp_dir("uipc_ckpt_missing")), std::runtime_error);
}
