#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "uipc/model.hpp"

using namespace uipc;

namespace {

// naive double loop straight off the score definition; kept deliberately
// independent of the cached production path
double brute_force_uipc_score(const UipcModel& m, int u, int t) {
    double total = 0.0;
    for (int i = 0; i < m.n_user_protos(); ++i)
        for (int j = 0; j < m.n_item_protos(); ++j)
            total += m.connections(i, j) *
                     shifted_cosine(m.user_emb.row(u), m.user_protos.row(i)) *
                     shifted_cosine(m.item_emb.row(t), m.item_protos.row(j));
    return total;
}

UipcModel random_model(int n_users, int n_items, int lu, int lt, int d, std::uint64_t seed) {
    UipcModel m(n_users, n_items, lu, lt, d);
    Rng rng(seed);
    for (Matrix* t : m.tensors())
        for (int r = 0; r < t->rows(); ++r)
            for (int c = 0; c < t->cols(); ++c) (*t)(r, c) = rng.normal(0.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("shifted cosine base cases") {
    const double a[] = {1.0, 0.0};
    const double b[] = {-1.0, 0.0};
    const double c[] = {0.0, 1.0};
    CHECK(shifted_cosine(a, a) == doctest::Approx(2.0));
    CHECK(shifted_cosine(a, b) == doctest::Approx(0.0));
    CHECK(shifted_cosine(a, c) == doctest::Approx(1.0));
}

TEST_CASE("shifted cosine is scale invariant and bounded") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(5), b(5);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        const double s = shifted_cosine(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 2.0);
        std::vector<double> a2 = a;
        const double scale = 0.001 + rng.uniform() * 100.0;
        for (auto& v : a2) v *= scale;
        CHECK(shifted_cosine(a2, b) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("degenerate zero vector compares as neutral") {
    const double z[] = {0.0, 0.0};
    const double a[] = {3.0, 4.0};
    CHECK(shifted_cosine(z, a) == 1.0);
    CHECK(shifted_cosine(z, z) == 1.0);
}

TEST_CASE("similarity vector composes per-prototype cosines") {
    Matrix protos(2, 2);
    protos(0, 0) = 1.0;
    protos(1, 1) = 1.0;
    const double x[] = {1.0, 0.0};
    auto v = similarity_vector(x, protos);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(2.0));
    CHECK(v[1] == doctest::Approx(1.0));

    Matrix one(1, 2);
    one(0, 0) = 1.0;
    auto single = similarity_vector(x, one);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == doctest::Approx(2.0));
}

TEST_CASE("similarity vector matches per-entry recomputation") {
    Rng rng(11);
    Matrix protos(4, 6);
    std::vector<double> x(6);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 6; ++c) protos(r, c) = rng.normal();
    for (auto& v : x) v = rng.normal();
    auto vec = similarity_vector(x, protos);
    for (int l = 0; l < 4; ++l)
        CHECK(vec[l] == doctest::Approx(shifted_cosine(x, protos.row(l))).epsilon(1e-12));
}

TEST_CASE("similarity vector rejects dimension mismatch") {
    Matrix protos(2, 3);
    const double x[] = {1.0, 0.0};
    CHECK_THROWS_AS((void)similarity_vector(x, protos), std::invalid_argument);
}

TEST_CASE("uipc score: zero connections give zero everywhere") {
    UipcModel m = random_model(3, 3, 2, 2, 4, 5);
    m.connections.fill(0.0);
    for (int u = 0; u < 3; ++u)
        for (int t = 0; t < 3; ++t) CHECK(m.score(u, t) == doctest::Approx(0.0));
}

TEST_CASE("uipc score: aligned single-prototype case gives 0.5 * 2 * 2") {
    UipcModel m(1, 1, 1, 1, 2);
    m.user_emb(0, 0) = 1.0;
    m.item_emb(0, 1) = 1.0;
    m.user_protos(0, 0) = 1.0;
    m.item_protos(0, 1) = 1.0;
    m.connections(0, 0) = 0.5;
    CHECK(m.score(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("uipc score matches the brute-force double loop") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        UipcModel m = random_model(4, 5, 3, 4, 6, 100 + seed);
        Rng rng(seed);
        const int u = static_cast<int>(rng.uniform_int(4));
        const int t = static_cast<int>(rng.uniform_int(5));
        CHECK(m.score(u, t) == doctest::Approx(brute_force_uipc_score(m, u, t)).epsilon(1e-12));
    }
}

TEST_CASE("uipc score is linear in the connection table") {
    UipcModel m = random_model(3, 3, 2, 3, 4, 17);
    Matrix w1 = m.connections, w2(2, 3);
    Rng rng(18);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) w2(i, j) = rng.normal();
    const double s1 = m.score(1, 2);
    m.connections = w2;
    const double s2 = m.score(1, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) m.connections(i, j) = w1(i, j) + w2(i, j);
    CHECK(m.score(1, 2) == doctest::Approx(s1 + s2).epsilon(1e-9));
}

TEST_CASE("preference vector hand case") {
    UipcModel m(1, 2, 1, 2, 2);
    m.user_emb(0, 0) = 1.0;
    m.user_protos(0, 0) = 1.0;
    m.connections(0, 0) = 1.0;
    m.connections(0, 1) = -2.0;
    auto r = m.preference_vector(0);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(2.0));
    CHECK(r[1] == doctest::Approx(-4.0));
}

TEST_CASE("preference vector zero weights give the zero vector") {
    UipcModel m = random_model(4, 4, 3, 4, 5, 23);
    m.connections.fill(0.0);
    for (double v : m.preference_vector(0)) CHECK(v == 0.0);
}

TEST_CASE("score equals <preference vector, t*> on random parameters") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        UipcModel m = random_model(3, 5, 2, 5, 6, 300 + seed);
        auto r = m.preference_vector(2);
        auto t_star = m.item_similarities(3);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * t_star[j];
        CHECK(m.score(2, 3) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("score breakdown identity and fields") {
    UipcModel m(1, 1, 1, 1, 2);
    m.user_emb(0, 0) = 1.0;
    m.item_emb(0, 1) = 1.0;
    m.user_protos(0, 0) = 1.0;
    m.item_protos(0, 1) = 1.0;
    m.connections(0, 0) = 0.5;
    auto b = m.breakdown(0, 0);
    REQUIRE(b.prototype_scores.size() == 1);
    CHECK(b.prototype_scores[0] == doctest::Approx(2.0));
    CHECK(b.total == doctest::Approx(2.0));

    m.connections.fill(0.0);
    b = m.breakdown(0, 0);
    CHECK(b.prototype_scores[0] == 0.0);
    CHECK(b.total == 0.0);
}

TEST_CASE("breakdown total equals score on 1000 random pairs") {
    for (int trial = 0; trial < 1000; ++trial) {
        Rng pick(9000 + trial);
        const int lu = 1 + static_cast<int>(pick.uniform_int(4));
        const int lt = 1 + static_cast<int>(pick.uniform_int(4));
        const int d = 1 + static_cast<int>(pick.uniform_int(8));
        UipcModel m = random_model(4, 4, lu, lt, d, 5000 + trial);
        const int u = static_cast<int>(pick.uniform_int(4));
        const int t = static_cast<int>(pick.uniform_int(4));
        const double score = m.score(u, t);
        const auto b = m.breakdown(u, t);
        CHECK(std::abs(score - b.total) <= 1e-9 * (1.0 + std::abs(score)));
        for (std::size_t j = 0; j < b.prototype_scores.size(); ++j)
            CHECK(b.prototype_scores[j] == b.preferences[j] * b.t_star[j]);
    }
}

TEST_CASE("scale invariance of the score") {
    UipcModel m = random_model(3, 3, 3, 3, 5, 77);
    const double base = m.score(0, 1);
    for (int c = 0; c < 5; ++c) m.user_emb(0, c) *= 42.0;
    for (int c = 0; c < 5; ++c) m.item_protos(2, c) *= 0.001;
    CHECK(m.score(0, 1) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("index range errors") {
    UipcModel m = random_model(2, 3, 1, 1, 2, 1);
    CHECK_THROWS_AS(m.score(2, 0), std::out_of_range);
    CHECK_THROWS_AS(m.score(0, 3), std::out_of_range);
    CHECK_THROWS_AS(m.preference_vector(-1), std::out_of_range);
}

TEST_CASE("batched scoring agrees with per-pair scoring") {
    UipcModel m = random_model(6, 7, 3, 4, 5, 321);
    std::vector<ScoredPair> pairs;
    Rng rng(55);
    for (int k = 0; k < 40; ++k)
        pairs.push_back({static_cast<int>(rng.uniform_int(6)), static_cast<int>(rng.uniform_int(7))});
    std::vector<double> out(pairs.size());
    m.score_batch(pairs, out);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        CHECK(out[k] == doctest::Approx(m.score(pairs[k].user, pairs[k].item)).epsilon(1e-12));
}

TEST_CASE("parameter counts reproduce the published table") {
    CHECK(parameter_count(ModelKind::MF, 5000, 5000, 100, 100, 100) == 1'000'000);
    CHECK(parameter_count(ModelKind::ACF, 5000, 5000, 100, 100, 100) == 1'010'000);
    CHECK(parameter_count(ModelKind::ProtoMF, 5000, 5000, 100, 100, 100) == 1'040'000);
    CHECK(parameter_count(ModelKind::UipcMF, 5000, 5000, 100, 100, 100) == 1'030'000);
}

TEST_CASE("parameter_count rejects non-positive shapes") {
    CHECK_THROWS_AS(parameter_count(ModelKind::MF, 0, 5, 1, 1, 3), std::invalid_argument);
}

TEST_CASE("model kind names round-trip, with the l1 alias") {
    CHECK(model_kind_from_string("mf") == ModelKind::MF);
    CHECK(model_kind_from_string("uipc-mf-l1") == ModelKind::UipcMF);
    CHECK_THROWS_AS(model_kind_from_string("ncf"), std::invalid_argument);
}
