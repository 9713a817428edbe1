#include "uipc/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace uipc {

void SynthConfig::validate() const {
    if (n_groups < 1 || users_per_group < 1 || items_per_group < 1)
        throw std::invalid_argument("synth: all counts must be >= 1");
    if (!(p_in > 0.0 && p_in <= 1.0)) throw std::invalid_argument("synth: p_in must be in (0, 1]");
    if (!(p_out >= 0.0 && p_out < 1.0)) throw std::invalid_argument("synth: p_out must be in [0, 1)");
    if (!(p_in > p_out)) throw std::invalid_argument("synth: p_in must exceed p_out");
}

SynthData generate(const SynthConfig& config) {
    config.validate();
    const int n_items = config.n_groups * config.items_per_group;
    const int n_users_planned = config.n_groups * config.users_per_group;

    auto item_group = [&](int t) { return t / config.items_per_group; };

    SynthData out;
    Dataset& ds = out.dataset;

    std::vector<char> item_used(n_items, 0);
    struct Row {
        int user, item;
    };
    std::vector<Row> rows;

    for (int u = 0; u < n_users_planned; ++u) {
        const int ug = u / config.users_per_group;
        std::vector<int> items;
        for (int attempt = 0; attempt < 2 && items.empty(); ++attempt) {
            Rng rng(derive_seed(config.seed, attempt == 0 ? "user" : "user-retry",
                                static_cast<std::uint64_t>(u)));
            for (int t = 0; t < n_items; ++t) {
                const double p = item_group(t) == ug ? config.p_in : config.p_out;
                if (rng.uniform() < p) items.push_back(t);
            }
        }
        if (items.empty()) {
            ++out.dropped_users;  // a user with no interactions cannot be modeled
            continue;
        }
        const int dense_user = ds.n_users++;
        ds.user_keys.push_back("u" + std::to_string(u));
        out.user_groups.push_back(ug);
        for (int t : items) {
            rows.push_back({dense_user, t});
            item_used[t] = 1;
        }
    }

    // items without a single interaction would violate the dataset core
    // invariant; drop and renumber (vanishingly rare at sensible rates)
    std::vector<int> item_dense(n_items, -1);
    for (int t = 0; t < n_items; ++t) {
        if (!item_used[t]) continue;
        item_dense[t] = ds.n_items++;
        ds.item_keys.push_back("i" + std::to_string(t));
        out.item_groups.push_back(item_group(t));
    }

    // timestamps: a random permutation of 1..n over rows in generation order
    std::vector<std::int64_t> stamps(rows.size());
    for (std::size_t k = 0; k < stamps.size(); ++k) stamps[k] = static_cast<std::int64_t>(k) + 1;
    Rng ts_rng(derive_seed(config.seed, "timestamps"));
    ts_rng.shuffle(stamps);

    ds.interactions.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
        ds.interactions.push_back({rows[k].user, item_dense[rows[k].item], stamps[k]});
    for (int u = 0; u < ds.n_users; ++u) ds.user_index.emplace(ds.user_keys[u], u);
    for (int i = 0; i < ds.n_items; ++i) ds.item_index.emplace(ds.item_keys[i], i);
    return out;
}

namespace {

// group with the highest mean shifted cosine between the prototype and the
// group's member embeddings; ties to the lowest group index
int assign_group(std::span<const double> proto, const Matrix& emb, std::span<const int> groups,
                 int n_groups) {
    std::vector<double> mean(n_groups, 0.0);
    std::vector<int> count(n_groups, 0);
    for (int e = 0; e < emb.rows(); ++e) {
        mean[groups[e]] += shifted_cosine(proto, emb.row(e));
        ++count[groups[e]];
    }
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < n_groups; ++g) {
        if (count[g] == 0) continue;
        const double m = mean[g] / count[g];
        if (m > best_mean) {
            best_mean = m;
            best = g;
        }
    }
    return best;  // -1 only when every group is empty
}

}  // namespace

BlockScore block_structure_score(const UipcModel& model, std::span<const int> user_groups,
                                 std::span<const int> item_groups) {
    if (static_cast<int>(user_groups.size()) != model.n_users() ||
        static_cast<int>(item_groups.size()) != model.n_items())
        throw std::invalid_argument("block_structure_score: label lengths do not match the model");

    int n_groups = 0;
    for (int g : user_groups) n_groups = std::max(n_groups, g + 1);
    for (int g : item_groups) n_groups = std::max(n_groups, g + 1);

    BlockScore out;
    out.user_proto_group.resize(model.n_user_protos());
    out.item_proto_group.resize(model.n_item_protos());
    for (int l = 0; l < model.n_user_protos(); ++l)
        out.user_proto_group[l] =
            assign_group(model.user_protos.row(l), model.user_emb, user_groups, n_groups);
    for (int j = 0; j < model.n_item_protos(); ++j)
        out.item_proto_group[j] =
            assign_group(model.item_protos.row(j), model.item_emb, item_groups, n_groups);

    int hits = 0;
    for (int l = 0; l < model.n_user_protos(); ++l) {
        if (out.user_proto_group[l] < 0) {
            ++out.excluded;
            continue;
        }
        int best_j = 0;
        double best_w = -1.0;
        for (int j = 0; j < model.n_item_protos(); ++j) {
            const double w = std::abs(model.connections(l, j));
            if (w > best_w) {
                best_w = w;
                best_j = j;
            }
        }
        if (out.item_proto_group[best_j] < 0) {
            ++out.excluded;
            continue;
        }
        ++out.assigned;
        if (out.item_proto_group[best_j] == out.user_proto_group[l]) ++hits;
    }
    out.score = out.assigned > 0 ? static_cast<double>(hits) / out.assigned : 0.0;
    return out;
}

void write_labels_file(const std::string& dir, const SynthData& data) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / "labels.tsv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t u = 0; u < data.user_groups.size(); ++u)
        out << "user\t" << u << '\t' << data.user_groups[u] << '\n';
    for (std::size_t i = 0; i < data.item_groups.size(); ++i)
        out << "item\t" << i << '\t' << data.item_groups[i] << '\n';
}

}  // namespace uipc
