#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "uipc/explainer.hpp"

using namespace uipc;

namespace {

// tiny in-memory dataset: 2 users, 6 items, user 0 trains on {0, 1, 2}
PreparedData tiny_data() {
    PreparedData d;
    d.n_users = 2;
    d.n_items = 6;
    for (int u = 0; u < d.n_users; ++u) d.user_keys.push_back("u" + std::to_string(u));
    for (int i = 0; i < d.n_items; ++i) d.item_keys.push_back("i" + std::to_string(i));
    d.train = {{0, 0, 1}, {0, 1, 2}, {0, 2, 3}, {1, 3, 1}, {1, 0, 2}};
    d.fingerprint = idmap_fingerprint(d.user_keys, d.item_keys);
    d.build_derived();
    return d;
}

UipcModel random_model(std::uint64_t seed, int n_users = 2, int n_items = 6, int lu = 2, int lt = 4,
                       int d = 5) {
    UipcModel m(n_users, n_items, lu, lt, d);
    Rng rng(seed);
    for (Matrix* t : m.tensors())
        for (int r = 0; r < t->rows(); ++r)
            for (int c = 0; c < t->cols(); ++c) (*t)(r, c) = rng.normal(0.0, 0.8);
    return m;
}

}  // namespace

TEST_CASE("explain_pair: zero connections keep index order and zero scores") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(1);
    m.connections.fill(0.0);
    Explainer ex(m, data);
    auto rec = ex.explain_pair(0, 4, 4);
    REQUIRE(rec.top_prototypes.size() == 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(rec.top_prototypes[j].first == j);  // tie rule: lowest index first
        CHECK(rec.top_prototypes[j].second == 0.0);
    }
    CHECK(rec.breakdown.total == 0.0);
}

TEST_CASE("explain_pair: a dominant prototype ranks first") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(2);
    // make prototype 2 dominate: it alone carries large connection weight and
    // the item sits right on it
    m.connections.fill(0.01);
    for (int i = 0; i < 2; ++i) m.connections(i, 2) = 5.0;
    for (int c = 0; c < 5; ++c) m.item_emb(4, c) = m.item_protos(2, c);
    Explainer ex(m, data);
    auto rec = ex.explain_pair(0, 4, 2);
    CHECK(rec.top_prototypes[0].first == 2);
    CHECK(std::abs(rec.top_prototypes[0].second) >=
          10.0 * std::abs(rec.top_prototypes[1].second));
}

TEST_CASE("explain_pair: full prototype list recomposes the logit") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(3);
    Explainer ex(m, data);
    auto rec = ex.explain_pair(0, 5, 4);  // top_n == Lt
    double sum = 0.0;
    for (const auto& [proto, s] : rec.top_prototypes) sum += s;
    CHECK(std::abs(sum - rec.breakdown.total) <= 1e-9 * (1.0 + std::abs(rec.breakdown.total)));
    CHECK(rec.breakdown.total == doctest::Approx(m.score(0, 5)).epsilon(1e-9));
}

TEST_CASE("explain_pair: supporting items come from the user's train set") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(4);
    Explainer ex(m, data);
    auto rec = ex.explain_pair(0, 4, 2, 10);
    for (const auto& support : rec.supporting_items) {
        CHECK(support.size() == 3);  // user 0 trains on exactly 3 items
        for (const auto& si : support) CHECK((si.item == 0 || si.item == 1 || si.item == 2));
        for (std::size_t i = 1; i < support.size(); ++i)
            CHECK(support[i - 1].similarity >= support[i].similarity);
    }
}

TEST_CASE("nearest_items: an item on the prototype ranks first with sim 2") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(5);
    for (int c = 0; c < 5; ++c) m.item_emb(3, c) = 2.5 * m.item_protos(1, c);
    Explainer ex(m, data);
    auto prof = ex.nearest_items(1, 3);
    REQUIRE(prof.nearest_items.size() == 3);
    CHECK(prof.nearest_items[0].item == 3);
    CHECK(prof.nearest_items[0].similarity == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("nearest_items matches a full-sort oracle") {
    PreparedData data = tiny_data();
    data.n_items = 100;
    data.item_keys.clear();
    for (int i = 0; i < 100; ++i) data.item_keys.push_back("i" + std::to_string(i));
    data.build_derived();
    UipcModel m = random_model(6, 2, 100, 2, 4, 5);
    Explainer ex(m, data);
    auto prof = ex.nearest_items(2, 100);

    std::vector<std::pair<double, int>> oracle;
    for (int t = 0; t < 100; ++t)
        oracle.emplace_back(-shifted_cosine(m.item_emb.row(t), m.item_protos.row(2)), t);
    std::sort(oracle.begin(), oracle.end());
    for (int r = 0; r < 100; ++r) CHECK(prof.nearest_items[r].item == oracle[r].second);

    CHECK_THROWS_AS(ex.nearest_items(99, 3), std::out_of_range);
}

TEST_CASE("preference distribution quantiles and sign flags") {
    PreparedData data = tiny_data();
    UipcModel m(2, 6, 1, 2, 2);
    // user similarities: user 0 on the prototype (sim 2), user 1 orthogonal (sim 1)
    m.user_emb(0, 0) = 1.0;
    m.user_emb(1, 1) = 1.0;
    m.user_protos(0, 0) = 1.0;
    Rng rng(7);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 2; ++c) m.item_emb(r, c) = rng.normal();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m.item_protos(r, c) = rng.normal();

    // prototype 0: r = w * sim in {2w, w}: same sign for w != 0
    // prototype 1: weights of opposite sign per user impossible with one user
    // prototype; instead pick w negative -> both negative
    m.connections(0, 0) = 0.5;
    m.connections(0, 1) = -1.0;
    Explainer ex(m, data);
    auto dist = ex.preference_distribution();
    REQUIRE(dist.size() == 2);
    CHECK(dist[0].min == doctest::Approx(0.5));
    CHECK(dist[0].max == doctest::Approx(1.0));
    CHECK(dist[0].median == doctest::Approx(0.75));
    CHECK(dist[0].all_same_sign);
    CHECK(dist[1].min == doctest::Approx(-2.0));
    CHECK(dist[1].max == doctest::Approx(-1.0));
    CHECK(dist[1].all_same_sign);

    m.connections.fill(0.0);
    auto zero = Explainer(m, data).preference_distribution();
    CHECK(zero[0].min == 0.0);
    CHECK(!zero[0].all_same_sign);  // min * max == 0 is not "same sign"
}

TEST_CASE("quantiles use inclusive linear interpolation") {
    const double v[] = {1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted(v, 1.0) == 4.0);
}

TEST_CASE("preference distribution matches per-user preference vectors") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(8);
    Explainer ex(m, data);
    auto dist = ex.preference_distribution();
    auto r0 = m.preference_vector(0);
    auto r1 = m.preference_vector(1);
    for (int j = 0; j < 4; ++j) {
        CHECK(dist[j].min == doctest::Approx(std::min(r0[j], r1[j])));
        CHECK(dist[j].max == doctest::Approx(std::max(r0[j], r1[j])));
    }
}

TEST_CASE("render_rationale fills placeholders") {
    PreparedData data = tiny_data();
    UipcModel m = random_model(9);
    Explainer ex(m, data);
    auto rec = ex.explain_pair(0, 4, 1, 2);
    auto item_name = [&](int t) { return data.item_keys[t]; };
    auto user_name = [&](int u) { return data.user_keys[u]; };

    const std::string text =
        render_rationale(rec, "Other listeners who have listened to {items} also enjoyed {item}.",
                         item_name, user_name);
    CHECK(text.find(" and ") != std::string::npos);
    CHECK(text.find("i4") != std::string::npos);
    CHECK(text.find('{') == std::string::npos);

    CHECK_THROWS_WITH_AS(render_rationale(rec, "bad {placeholder}", item_name, user_name),
                         doctest::Contains("placeholder"), std::invalid_argument);

    // empty supporting list falls back to naming the prototype
    rec.supporting_items.front().clear();
    const std::string fallback = render_rationale(rec, "Because of {items}.", item_name, user_name);
    CHECK(fallback.find("item prototype") != std::string::npos);
}
