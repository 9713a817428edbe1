#include "uipc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uipc {

namespace {

std::vector<std::string_view> split_line(std::string_view line, std::string_view delim) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(delim, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + delim.size();
    }
    return out;
}

double parse_double(std::string_view s, const char* what, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("malformed " + std::string(what) + " '" + std::string(s) +
                                 "' at line " + std::to_string(line_no));
    return v;
}

std::int64_t parse_int64(std::string_view s, const char* what, std::size_t line_no) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("malformed " + std::string(what) + " '" + std::string(s) +
                                 "' at line " + std::to_string(line_no));
    return v;
}

}  // namespace

std::vector<RawInteraction> ingest(const std::string& path, const IngestSchema& schema,
                                   std::optional<double> positive_threshold) {
    if (positive_threshold && schema.rating_col < 0)
        throw std::invalid_argument("positive threshold set but the schema has no rating column");
    if (schema.delimiter.empty()) throw std::invalid_argument("empty delimiter");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);

    const int max_col = std::max({schema.user_col, schema.item_col, schema.rating_col, schema.time_col});
    std::vector<RawInteraction> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && schema.has_header) continue;
        if (line.empty()) continue;
        auto fields = split_line(line, schema.delimiter);
        if (static_cast<int>(fields.size()) <= max_col)
            throw std::runtime_error("malformed row at line " + std::to_string(line_no) + ": expected >= " +
                                     std::to_string(max_col + 1) + " columns, got " +
                                     std::to_string(fields.size()));
        RawInteraction r;
        r.user_key = std::string(fields[schema.user_col]);
        r.item_key = std::string(fields[schema.item_col]);
        if (r.user_key.empty() || r.item_key.empty())
            throw std::runtime_error("malformed row at line " + std::to_string(line_no) + ": empty key");
        if (schema.rating_col >= 0)
            r.rating = parse_double(fields[schema.rating_col], "rating", line_no);
        r.timestamp = parse_int64(fields[schema.time_col], "timestamp", line_no);
        if (positive_threshold && !(*r.rating > *positive_threshold)) continue;
        rows.push_back(std::move(r));
    }
    return rows;
}

Dataset k_core_filter(const std::vector<RawInteraction>& rows, int user_core, int item_core) {
    if (user_core < 1 || item_core < 1)
        throw std::invalid_argument("k_core_filter: core thresholds must be >= 1");

    // provisional ids over all keys, in first-appearance order
    std::unordered_map<std::string, int> umap, imap;
    std::vector<std::string> ukeys, ikeys;
    auto intern = [](const std::string& key, std::unordered_map<std::string, int>& map,
                     std::vector<std::string>& keys) {
        auto [it, inserted] = map.emplace(key, static_cast<int>(keys.size()));
        if (inserted) keys.push_back(key);
        return it->second;
    };

    // dedup (user, item), keeping the earliest timestamp and the first slot
    struct Edge {
        int user, item;
        std::int64_t timestamp;
        bool removed = false;
    };
    std::vector<Edge> edges;
    std::unordered_map<std::int64_t, int> edge_index;  // (user << 32 | item) -> edge slot
    for (const auto& r : rows) {
        const int u = intern(r.user_key, umap, ukeys);
        const int t = intern(r.item_key, imap, ikeys);
        const std::int64_t key = (static_cast<std::int64_t>(u) << 32) | static_cast<std::uint32_t>(t);
        auto [it, inserted] = edge_index.emplace(key, static_cast<int>(edges.size()));
        if (inserted)
            edges.push_back({u, t, r.timestamp});
        else
            edges[it->second].timestamp = std::min(edges[it->second].timestamp, r.timestamp);
    }

    std::vector<std::vector<int>> user_edges(ukeys.size()), item_edges(ikeys.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        user_edges[edges[e].user].push_back(static_cast<int>(e));
        item_edges[edges[e].item].push_back(static_cast<int>(e));
    }

    // iterative pruning until every surviving entity meets its core threshold
    std::vector<int> udeg(ukeys.size()), ideg(ikeys.size());
    std::vector<char> uremoved(ukeys.size(), 0), iremoved(ikeys.size(), 0);
    std::deque<std::pair<char, int>> queue;  // ('u' or 'i', index)
    for (std::size_t u = 0; u < ukeys.size(); ++u) {
        udeg[u] = static_cast<int>(user_edges[u].size());
        if (udeg[u] < user_core) {
            uremoved[u] = 1;
            queue.emplace_back('u', static_cast<int>(u));
        }
    }
    for (std::size_t i = 0; i < ikeys.size(); ++i) {
        ideg[i] = static_cast<int>(item_edges[i].size());
        if (ideg[i] < item_core) {
            iremoved[i] = 1;
            queue.emplace_back('i', static_cast<int>(i));
        }
    }
    while (!queue.empty()) {
        auto [kind, idx] = queue.front();
        queue.pop_front();
        const auto& incident = kind == 'u' ? user_edges[idx] : item_edges[idx];
        for (int e : incident) {
            if (edges[e].removed) continue;
            edges[e].removed = true;
            if (kind == 'u') {
                const int i = edges[e].item;
                if (!iremoved[i] && --ideg[i] < item_core) {
                    iremoved[i] = 1;
                    queue.emplace_back('i', i);
                }
            } else {
                const int u = edges[e].user;
                if (!uremoved[u] && --udeg[u] < user_core) {
                    uremoved[u] = 1;
                    queue.emplace_back('u', u);
                }
            }
        }
    }

    Dataset ds;
    std::vector<int> unew(ukeys.size(), -1), inew(ikeys.size(), -1);
    for (const auto& e : edges) {
        if (e.removed) continue;
        if (unew[e.user] < 0) {
            unew[e.user] = ds.n_users++;
            ds.user_keys.push_back(ukeys[e.user]);
        }
        if (inew[e.item] < 0) {
            inew[e.item] = ds.n_items++;
            ds.item_keys.push_back(ikeys[e.item]);
        }
        ds.interactions.push_back({unew[e.user], inew[e.item], e.timestamp});
    }
    if (ds.interactions.empty())
        throw std::runtime_error("k-core filtering removed every interaction; thresholds user_core=" +
                                 std::to_string(user_core) + ", item_core=" + std::to_string(item_core) +
                                 " are too strict for this data");
    for (int u = 0; u < ds.n_users; ++u) ds.user_index.emplace(ds.user_keys[u], u);
    for (int i = 0; i < ds.n_items; ++i) ds.item_index.emplace(ds.item_keys[i], i);
    return ds;
}

namespace {

std::vector<int> draw_negatives(int n_items, const std::vector<int>& owned_sorted, Rng& rng) {
    std::vector<int> allowed;
    allowed.reserve(n_items - owned_sorted.size());
    std::size_t o = 0;
    for (int i = 0; i < n_items; ++i) {
        if (o < owned_sorted.size() && owned_sorted[o] == i) {
            ++o;
            continue;
        }
        allowed.push_back(i);
    }
    if (allowed.size() < static_cast<std::size_t>(kEvalNegatives))
        throw std::runtime_error("cannot sample " + std::to_string(kEvalNegatives) +
                                 " distinct negatives: only " + std::to_string(allowed.size()) +
                                 " items outside the user's history");
    rng.partial_shuffle(allowed, kEvalNegatives);
    allowed.resize(kEvalNegatives);
    return allowed;
}

}  // namespace

SplitBundle leave_one_out_split(const Dataset& dataset, std::uint64_t seed) {
    // per-user rows in input order; stable sort by timestamp keeps ties in
    // input order, so "latest" is well defined
    std::vector<std::vector<int>> per_user(dataset.n_users);
    for (std::size_t k = 0; k < dataset.interactions.size(); ++k)
        per_user[dataset.interactions[k].user].push_back(static_cast<int>(k));

    enum Role : char { Train, Valid, Test };
    std::vector<char> role(dataset.interactions.size(), Train);
    for (int u = 0; u < dataset.n_users; ++u) {
        auto& rows = per_user[u];
        if (rows.size() < 3) continue;  // train-only user
        std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) {
            return dataset.interactions[a].timestamp < dataset.interactions[b].timestamp;
        });
        role[rows[rows.size() - 1]] = Test;
        role[rows[rows.size() - 2]] = Valid;
    }

    SplitBundle out;
    for (std::size_t k = 0; k < dataset.interactions.size(); ++k)
        if (role[k] == Train) out.train.push_back(dataset.interactions[k]);

    std::vector<std::vector<int>> owned(dataset.n_users);
    for (const auto& it : dataset.interactions) owned[it.user].push_back(it.item);
    for (auto& v : owned) std::sort(v.begin(), v.end());

    for (int u = 0; u < dataset.n_users; ++u) {
        auto& rows = per_user[u];
        if (rows.size() < 3) continue;
        const auto& vrow = dataset.interactions[rows[rows.size() - 2]];
        const auto& trow = dataset.interactions[rows[rows.size() - 1]];
        Rng vrng(derive_seed(seed, "negatives/validation", static_cast<std::uint64_t>(u)));
        Rng trng(derive_seed(seed, "negatives/test", static_cast<std::uint64_t>(u)));
        out.validation.push_back({u, vrow.item, vrow.timestamp, draw_negatives(dataset.n_items, owned[u], vrng)});
        out.test.push_back({u, trow.item, trow.timestamp, draw_negatives(dataset.n_items, owned[u], trng)});
    }
    return out;
}

PopularityTable PopularityTable::from_train(std::span<const Interaction> train, int n_items) {
    PopularityTable t;
    t.counts.assign(n_items, 0);
    for (const auto& it : train) ++t.counts[it.item];
    std::int64_t total = 0;
    for (auto c : t.counts) total += c;
    if (total == 0) throw std::invalid_argument("PopularityTable: empty train set");
    t.cumulative.resize(n_items);
    std::int64_t acc = 0;
    for (int i = 0; i < n_items; ++i) {
        acc += t.counts[i];
        t.cumulative[i] = static_cast<double>(acc) / static_cast<double>(total);
    }
    t.cumulative.back() = 1.0;
    return t;
}

int PopularityTable::sample(Rng& rng) const {
    const double x = rng.uniform();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    if (it == cumulative.end()) --it;
    return static_cast<int>(it - cumulative.begin());
}

std::string to_string(SamplingMode mode) {
    return mode == SamplingMode::Uniform ? "uniform" : "popular";
}

SamplingMode sampling_mode_from_string(std::string_view name) {
    if (name == "uniform") return SamplingMode::Uniform;
    if (name == "popular") return SamplingMode::Popular;
    throw std::invalid_argument("unknown sampling mode '" + std::string(name) +
                                "'; valid: uniform, popular");
}

std::vector<std::vector<int>> sample_train_negatives(
    std::span<const ScoredPair> positives, int n_neg, SamplingMode mode,
    const PopularityTable* popularity, int n_items,
    const std::vector<std::vector<int>>& user_train_items, Rng& rng) {
    if (n_neg < 1) throw std::invalid_argument("sample_train_negatives: n_neg must be >= 1");
    if (mode == SamplingMode::Popular && popularity == nullptr)
        throw std::invalid_argument("sample_train_negatives: popular mode needs a popularity table");

    std::vector<std::vector<int>> out(positives.size());
    for (std::size_t k = 0; k < positives.size(); ++k) {
        const auto& owned = user_train_items[positives[k].user];
        out[k].reserve(n_neg);
        int stale = 0;
        while (static_cast<int>(out[k].size()) < n_neg) {
            const int cand = mode == SamplingMode::Uniform
                                 ? static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_items)))
                                 : popularity->sample(rng);
            if (std::binary_search(owned.begin(), owned.end(), cand)) {
                if (++stale > 10000)
                    throw std::runtime_error("negative sampling exhausted: user " +
                                             std::to_string(positives[k].user) +
                                             " owns the entire reachable catalog");
                continue;
            }
            stale = 0;
            out[k].push_back(cand);
        }
    }
    return out;
}

void PreparedData::build_derived() {
    user_train_items.assign(n_users, {});
    for (const auto& it : train) user_train_items[it.user].push_back(it.item);
    for (auto& v : user_train_items) std::sort(v.begin(), v.end());
}

PreparedData PreparedData::from_parts(const Dataset& dataset, SplitBundle splits) {
    PreparedData d;
    d.n_users = dataset.n_users;
    d.n_items = dataset.n_items;
    d.user_keys = dataset.user_keys;
    d.item_keys = dataset.item_keys;
    d.train = std::move(splits.train);
    d.validation = std::move(splits.validation);
    d.test = std::move(splits.test);
    d.fingerprint = idmap_fingerprint(d.user_keys, d.item_keys);
    d.build_derived();
    return d;
}

namespace {

std::string idmap_text(const std::vector<std::string>& user_keys,
                       const std::vector<std::string>& item_keys) {
    std::ostringstream os;
    for (std::size_t u = 0; u < user_keys.size(); ++u) os << user_keys[u] << '\t' << u << "\tuser\n";
    for (std::size_t i = 0; i < item_keys.size(); ++i) os << item_keys[i] << '\t' << i << "\titem\n";
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string interactions_text(std::span<const Interaction> rows) {
    std::ostringstream os;
    for (const auto& r : rows) os << r.user << '\t' << r.item << '\t' << r.timestamp << '\n';
    return os.str();
}

}  // namespace

std::string idmap_fingerprint(const std::vector<std::string>& user_keys,
                              const std::vector<std::string>& item_keys) {
    const std::string text = idmap_text(user_keys, item_keys);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

void write_split_files(const std::string& dir, const Dataset& dataset, const SplitBundle& splits) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    write_file(base / "idmap.tsv", idmap_text(dataset.user_keys, dataset.item_keys));
    write_file(base / "train.tsv", interactions_text(splits.train));

    auto eval_text = [](std::span<const EvalExample> rows) {
        std::ostringstream os;
        for (const auto& r : rows) os << r.user << '\t' << r.item << '\t' << r.timestamp << '\n';
        return os.str();
    };
    write_file(base / "valid.tsv", eval_text(splits.validation));
    write_file(base / "test.tsv", eval_text(splits.test));

    std::ostringstream negs;
    auto emit_negs = [&](std::span<const EvalExample> rows, const char* stage) {
        for (const auto& r : rows) {
            negs << r.user << '\t' << stage << '\t';
            for (std::size_t i = 0; i < r.negatives.size(); ++i) {
                if (i) negs << ' ';
                negs << r.negatives[i];
            }
            negs << '\n';
        }
    };
    emit_negs(splits.validation, "validation");
    emit_negs(splits.test, "test");
    write_file(base / "negatives.tsv", negs.str());
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

PreparedData load_prepared(const std::string& dir) {
    const std::filesystem::path base(dir);
    PreparedData d;

    for (const auto& line : read_lines(base / "idmap.tsv")) {
        auto f = split_line(line, "\t");
        if (f.size() != 3) throw std::runtime_error("malformed idmap.tsv line: " + line);
        const int idx = static_cast<int>(parse_int64(f[1], "index", 0));
        if (f[2] == "user") {
            if (idx != static_cast<int>(d.user_keys.size()))
                throw std::runtime_error("idmap.tsv user indices are not dense");
            d.user_keys.emplace_back(f[0]);
        } else if (f[2] == "item") {
            if (idx != static_cast<int>(d.item_keys.size()))
                throw std::runtime_error("idmap.tsv item indices are not dense");
            d.item_keys.emplace_back(f[0]);
        } else {
            throw std::runtime_error("idmap.tsv: unknown entity kind '" + std::string(f[2]) + "'");
        }
    }
    d.n_users = static_cast<int>(d.user_keys.size());
    d.n_items = static_cast<int>(d.item_keys.size());
    d.fingerprint = idmap_fingerprint(d.user_keys, d.item_keys);

    auto parse_interaction = [](const std::string& line) {
        auto f = split_line(line, "\t");
        if (f.size() != 3) throw std::runtime_error("malformed split line: " + line);
        Interaction it;
        it.user = static_cast<int>(parse_int64(f[0], "user", 0));
        it.item = static_cast<int>(parse_int64(f[1], "item", 0));
        it.timestamp = parse_int64(f[2], "timestamp", 0);
        return it;
    };
    for (const auto& line : read_lines(base / "train.tsv")) d.train.push_back(parse_interaction(line));

    std::unordered_map<int, EvalExample> vmap, tmap;
    std::vector<int> vorder, torder;
    for (const auto& line : read_lines(base / "valid.tsv")) {
        auto it = parse_interaction(line);
        vmap[it.user] = {it.user, it.item, it.timestamp, {}};
        vorder.push_back(it.user);
    }
    for (const auto& line : read_lines(base / "test.tsv")) {
        auto it = parse_interaction(line);
        tmap[it.user] = {it.user, it.item, it.timestamp, {}};
        torder.push_back(it.user);
    }
    for (const auto& line : read_lines(base / "negatives.tsv")) {
        auto f = split_line(line, "\t");
        if (f.size() != 3) throw std::runtime_error("malformed negatives.tsv line: " + line);
        const int user = static_cast<int>(parse_int64(f[0], "user", 0));
        std::vector<int> negs;
        for (auto tok : split_line(f[2], " "))
            if (!tok.empty()) negs.push_back(static_cast<int>(parse_int64(tok, "negative", 0)));
        if (negs.size() != kEvalNegatives)
            throw std::runtime_error("negatives.tsv: expected " + std::to_string(kEvalNegatives) +
                                     " items for user " + std::to_string(user));
        auto& map = f[1] == "validation" ? vmap : tmap;
        auto found = map.find(user);
        if (found == map.end())
            throw std::runtime_error("negatives.tsv references unknown eval user " + std::to_string(user));
        found->second.negatives = std::move(negs);
    }
    for (int u : vorder) {
        if (vmap[u].negatives.empty())
            throw std::runtime_error("missing validation negatives for user " + std::to_string(u));
        d.validation.push_back(std::move(vmap[u]));
    }
    for (int u : torder) {
        if (tmap[u].negatives.empty())
            throw std::runtime_error("missing test negatives for user " + std::to_string(u));
        d.test.push_back(std::move(tmap[u]));
    }

    d.build_derived();
    return d;
}

}  // namespace uipc
