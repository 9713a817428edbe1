#include "uipc/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "uipc/checkpoint.hpp"
#include "uipc/config.hpp"
#include "uipc/evaluator.hpp"
#include "uipc/explainer.hpp"
#include "uipc/manifest.hpp"
#include "uipc/search.hpp"
#include "uipc/trainer.hpp"

namespace uipc {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Stopwatch {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

ModelSelection parse_model_selection(const std::string& name) {
    ModelSelection sel;
    sel.kind = model_kind_from_string(name);  // throws with the list of valid kinds
    sel.name = name;
    sel.force_l1_zero = name == "uipc-mf";
    return sel;
}

void cmd_prepare(const PrepareArgs& args) {
    Stopwatch watch;
    if (!fs::exists(args.input)) throw std::runtime_error("input file does not exist: " + args.input);

    auto rows = ingest(args.input, args.schema, args.threshold);
    Dataset dataset = k_core_filter(rows, args.user_core, args.item_core);
    SplitBundle splits = leave_one_out_split(dataset, args.seed);
    write_split_files(args.out_dir, dataset, splits);

    RunManifest manifest;
    manifest.subcommand = "prepare";
    manifest.config = {{"input", args.input},
                       {"delimiter", args.schema.delimiter},
                       {"user_col", args.schema.user_col},
                       {"item_col", args.schema.item_col},
                       {"rating_col", args.schema.rating_col},
                       {"time_col", args.schema.time_col},
                       {"has_header", args.schema.has_header},
                       {"threshold", args.threshold ? nlohmann::json(*args.threshold) : nlohmann::json()},
                       {"user_core", args.user_core},
                       {"item_core", args.item_core}};
    manifest.seed = args.seed;
    manifest.input_fingerprints[args.input] = file_fingerprint(args.input);
    for (const char* f : {"idmap.tsv", "train.tsv", "valid.tsv", "test.tsv", "negatives.tsv"})
        manifest.outputs.push_back((fs::path(args.out_dir) / f).string());
    manifest.wall_ms = watch.ms();
    write_run_manifest(args.out_dir, manifest);

    if (!args.quiet)
        std::cout << "prepared " << dataset.n_users << " users, " << dataset.n_items << " items, "
                  << dataset.interactions.size() << " interactions (" << splits.train.size()
                  << " train rows, " << splits.validation.size() << " eval users) -> "
                  << args.out_dir << '\n';
}

void cmd_train(const TrainArgs& args) {
    Stopwatch watch;
    const ModelSelection sel = parse_model_selection(args.model);
    PreparedData data = load_prepared(args.data_dir);

    TrainConfig config;
    if (!args.config_path.empty()) config = config_from_file(args.config_path);
    if (args.seed) config.seed = *args.seed;
    if (sel.force_l1_zero) config.reg.lambda_l1 = 0.0;
    config.validate();

    fs::create_directories(args.out_dir);
    auto loss_log = open_out(fs::path(args.out_dir) / "loss_log.csv");
    loss_log << "epoch,step,base,l2,reg_pu_to_u,reg_u_to_pu,reg_pt_to_t,reg_t_to_pt,l1_pref,total\n";
    auto on_step = [&](int epoch, int step, const LossReport& r) {
        loss_log << epoch << ',' << step << ',' << fmt(r.base) << ',' << fmt(r.l2) << ','
                 << fmt(r.reg_pu_to_u) << ',' << fmt(r.reg_u_to_pu) << ',' << fmt(r.reg_pt_to_t)
                 << ',' << fmt(r.reg_t_to_pt) << ',' << fmt(r.l1_pref) << ',' << fmt(r.total) << '\n';
    };

    TrainResult result = train(data, sel.kind, config, on_step);

    auto train_log = open_out(fs::path(args.out_dir) / "train_log.csv");
    train_log << "epoch,base,l2,reg_pu_to_u,reg_u_to_pu,reg_pt_to_t,reg_t_to_pt,l1_pref,total,"
                 "val_hr10,val_ndcg10,wall_ms,is_best\n";
    for (const auto& e : result.log.epochs) {
        const auto& m = e.mean;
        train_log << e.epoch << ',' << fmt(m.base) << ',' << fmt(m.l2) << ',' << fmt(m.reg_pu_to_u)
                  << ',' << fmt(m.reg_u_to_pu) << ',' << fmt(m.reg_pt_to_t) << ','
                  << fmt(m.reg_t_to_pt) << ',' << fmt(m.l1_pref) << ',' << fmt(m.total) << ','
                  << fmt(e.val_hr10) << ',' << fmt(e.val_ndcg10) << ',' << fmt(e.wall_ms) << ','
                  << (e.is_best ? 1 : 0) << '\n';
    }

    const std::string ckpt_dir = (fs::path(args.out_dir) / "checkpoint").string();
    nlohmann::json extra;
    extra["train_config"] = config_to_json(config);
    extra["model_name"] = sel.name;
    extra["seed"] = config.seed;
    extra["dataset_fingerprint"] = data.fingerprint;
    extra["l2_squared"] = config.l2_squared;
    extra["best_epoch"] = result.log.best_epoch;
    extra["best_val_hr10"] = result.log.best_hr10;
    save_checkpoint(ckpt_dir, *result.model, extra);

    RunManifest manifest;
    manifest.subcommand = "train";
    manifest.config = config_to_json(config);
    manifest.config["model"] = sel.name;
    manifest.config["data_dir"] = args.data_dir;
    manifest.seed = config.seed;
    for (const char* f : {"idmap.tsv", "train.tsv", "valid.tsv", "test.tsv", "negatives.tsv"})
        manifest.input_fingerprints[(fs::path(args.data_dir) / f).string()] =
            file_fingerprint((fs::path(args.data_dir) / f).string());
    manifest.outputs = {ckpt_dir, (fs::path(args.out_dir) / "train_log.csv").string(),
                        (fs::path(args.out_dir) / "loss_log.csv").string()};
    manifest.wall_ms = watch.ms();
    write_run_manifest(args.out_dir, manifest);

    if (!args.quiet)
        std::cout << "trained " << sel.name << ": best epoch " << result.log.best_epoch
                  << ", validation HR@10 " << fmt(result.log.best_hr10) << " -> " << ckpt_dir << '\n';
}

void cmd_evaluate(const EvaluateArgs& args) {
    Stopwatch watch;
    if (args.stage != "test" && args.stage != "validation")
        throw std::invalid_argument("unknown stage '" + args.stage + "'; valid: validation, test");

    PreparedData data = load_prepared(args.data_dir);
    LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint_dir);
    const std::string ckpt_fp = ckpt.manifest.value("dataset_fingerprint", "");
    if (ckpt_fp != data.fingerprint)
        throw std::runtime_error("id-map fingerprint mismatch: checkpoint was trained on '" + ckpt_fp +
                                 "' but " + args.data_dir + " has '" + data.fingerprint + "'");

    const auto& examples = args.stage == "test" ? data.test : data.validation;
    MetricsReport report = evaluate(*ckpt.model, examples, args.cutoffs);

    fs::create_directories(args.out_dir);
    const std::string model_name = ckpt.manifest.value("model_name", to_string(ckpt.model->kind()));
    const std::uint64_t seed = ckpt.manifest.value("seed", std::uint64_t{0});

    auto metrics = open_out(fs::path(args.out_dir) / "metrics.csv");
    metrics << "model,seed,stage,k,hr,ndcg\n";
    for (std::size_t i = 0; i < report.cutoffs.size(); ++i)
        metrics << model_name << ',' << seed << ',' << args.stage << ',' << report.cutoffs[i] << ','
                << fmt(report.hr[i]) << ',' << fmt(report.ndcg[i]) << '\n';

    auto ranks = open_out(fs::path(args.out_dir) / "ranks.csv");
    ranks << "user,rank\n";
    for (std::size_t i = 0; i < report.ranks.size(); ++i)
        ranks << report.users[i] << ',' << report.ranks[i] << '\n';

    RunManifest manifest;
    manifest.subcommand = "evaluate";
    manifest.config = {{"checkpoint", args.checkpoint_dir},
                       {"data_dir", args.data_dir},
                       {"stage", args.stage},
                       {"cutoffs", args.cutoffs}};
    manifest.seed = seed;
    manifest.input_fingerprints[(fs::path(args.data_dir) / "idmap.tsv").string()] = data.fingerprint;
    manifest.outputs = {(fs::path(args.out_dir) / "metrics.csv").string(),
                        (fs::path(args.out_dir) / "ranks.csv").string()};
    manifest.wall_ms = watch.ms();
    write_run_manifest(args.out_dir, manifest);

    if (!args.quiet) {
        std::cout << "stage=" << args.stage << " model=" << model_name << '\n';
        for (std::size_t i = 0; i < report.cutoffs.size(); ++i)
            std::cout << "  HR@" << report.cutoffs[i] << " = " << fmt(report.hr[i]) << "  NDCG@"
                      << report.cutoffs[i] << " = " << fmt(report.ndcg[i]) << '\n';
    }
}

namespace {

std::unordered_map<std::string, std::string> load_metadata(const std::string& path) {
    std::unordered_map<std::string, std::string> names;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open metadata sidecar: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) continue;  // display-less rows degrade to raw keys
        names.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    return names;
}

}  // namespace

void cmd_explain(const ExplainArgs& args) {
    Stopwatch watch;
    PreparedData data = load_prepared(args.data_dir);
    LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint_dir);
    const auto* model = dynamic_cast<const UipcModel*>(ckpt.model.get());
    if (!model)
        throw std::runtime_error("explain requires a uipc-mf checkpoint; this one holds '" +
                                 to_string(ckpt.model->kind()) + "'");
    const std::string ckpt_fp = ckpt.manifest.value("dataset_fingerprint", "");
    if (ckpt_fp != data.fingerprint)
        throw std::runtime_error("id-map fingerprint mismatch between checkpoint and " + args.data_dir);

    std::unordered_map<std::string, std::string> metadata;
    if (!args.metadata_path.empty()) metadata = load_metadata(args.metadata_path);
    auto item_display = [&](int t) {
        const std::string& key = data.item_keys[t];
        auto it = metadata.find(key);
        return it == metadata.end() ? key : it->second;
    };

    Explainer explainer(*model, data);
    fs::create_directories(args.out_dir);
    RunManifest manifest;
    manifest.subcommand = "explain";
    manifest.config = {{"checkpoint", args.checkpoint_dir}, {"data_dir", args.data_dir}};
    manifest.input_fingerprints[(fs::path(args.data_dir) / "idmap.tsv").string()] = data.fingerprint;

    if (!args.user_key.empty() || !args.item_key.empty()) {
        auto uit = std::find(data.user_keys.begin(), data.user_keys.end(), args.user_key);
        if (uit == data.user_keys.end())
            throw std::runtime_error("unknown user key '" + args.user_key + "'");
        auto iit = std::find(data.item_keys.begin(), data.item_keys.end(), args.item_key);
        if (iit == data.item_keys.end())
            throw std::runtime_error("unknown item key '" + args.item_key + "'");
        const int u = static_cast<int>(uit - data.user_keys.begin());
        const int t = static_cast<int>(iit - data.item_keys.begin());

        ExplanationRecord rec = explainer.explain_pair(u, t, args.top, args.items_per_prototype);
        nlohmann::json j;
        j["user"] = args.user_key;
        j["item"] = args.item_key;
        j["user_index"] = u;
        j["item_index"] = t;
        j["total"] = rec.breakdown.total;
        j["u_star"] = rec.breakdown.u_star;
        j["t_star"] = rec.breakdown.t_star;
        j["preferences"] = rec.breakdown.preferences;
        j["prototype_scores"] = rec.breakdown.prototype_scores;
        nlohmann::json tops = nlohmann::json::array();
        for (std::size_t k = 0; k < rec.top_prototypes.size(); ++k) {
            const auto [proto, s] = rec.top_prototypes[k];
            nlohmann::json support = nlohmann::json::array();
            for (const auto& si : rec.supporting_items[k])
                support.push_back({{"item", data.item_keys[si.item]},
                                   {"display", item_display(si.item)},
                                   {"similarity", si.similarity},
                                   {"occurrences", si.occurrences}});
            tops.push_back({{"prototype", proto},
                            {"score", s},
                            {"preference", rec.breakdown.preferences[proto]},
                            {"item_similarity", rec.breakdown.t_star[proto]},
                            {"supporting_items", support}});
        }
        j["top_prototypes"] = tops;
        j["rationale"] = render_rationale(rec, args.rationale_template, item_display,
                                          [&](int uu) { return data.user_keys[uu]; });
        auto out = open_out(fs::path(args.out_dir) / "explain.json");
        out << j.dump(2) << '\n';
        manifest.outputs.push_back((fs::path(args.out_dir) / "explain.json").string());
        manifest.config["user"] = args.user_key;
        manifest.config["item"] = args.item_key;
        manifest.config["top"] = args.top;
        if (!args.quiet) std::cout << "explanation -> " << args.out_dir << "/explain.json\n";
    }

    if (args.prototype >= 0) {
        PrototypeProfile prof = explainer.nearest_items(args.prototype, args.top);
        auto out = open_out(fs::path(args.out_dir) / "prototypes.csv");
        out << "prototype,rank,item,similarity,occurrences\n";
        for (std::size_t r = 0; r < prof.nearest_items.size(); ++r) {
            const auto& ni = prof.nearest_items[r];
            out << prof.prototype << ',' << r + 1 << ',' << data.item_keys[ni.item] << ','
                << fmt(ni.similarity) << ',' << ni.occurrences << '\n';
        }
        manifest.outputs.push_back((fs::path(args.out_dir) / "prototypes.csv").string());
        manifest.config["prototype"] = args.prototype;
        if (!args.quiet) std::cout << "prototype profile -> " << args.out_dir << "/prototypes.csv\n";
    }

    if (args.pref_dist) {
        auto dist = explainer.preference_distribution();
        auto out = open_out(fs::path(args.out_dir) / "pref_dist.csv");
        out << "prototype,min,q1,median,q3,max,all_same_sign\n";
        for (const auto& d : dist)
            out << d.prototype << ',' << fmt(d.min) << ',' << fmt(d.q1) << ',' << fmt(d.median)
                << ',' << fmt(d.q3) << ',' << fmt(d.max) << ',' << (d.all_same_sign ? 1 : 0) << '\n';
        manifest.outputs.push_back((fs::path(args.out_dir) / "pref_dist.csv").string());
        manifest.config["pref_dist"] = true;
        if (!args.quiet) std::cout << "preference distribution -> " << args.out_dir << "/pref_dist.csv\n";
    }

    if (manifest.outputs.empty())
        throw std::invalid_argument("explain: nothing to do; pass --user/--item, --prototype or --pref-dist");
    manifest.wall_ms = watch.ms();
    write_run_manifest(args.out_dir, manifest);
}

void cmd_search(const SearchArgs& args) {
    Stopwatch watch;
    const ModelSelection sel = parse_model_selection(args.model);
    PreparedData data = load_prepared(args.data_dir);
    SearchSpace space = parse_search_space(args.space_path);

    TrainConfig base;
    if (!args.config_path.empty()) base = config_from_file(args.config_path);
    if (sel.force_l1_zero) base.reg.lambda_l1 = 0.0;

    auto outcomes = random_search(data, sel.kind, base, space, args.trials, args.seed, args.parallel);

    fs::create_directories(args.out_dir);
    auto table = open_out(fs::path(args.out_dir) / "trials.csv");
    table << "rank,trial,val_hr10,val_ndcg10,best_epoch,embedding_size,base_loss,sampling,neg_samples,"
             "batch_size,optimizer,lr,user_prototypes,item_prototypes,lambda_l2,lambda_1,lambda_2,"
             "lambda_3,lambda_4,lambda_l1,seed\n";
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const auto& o = outcomes[r];
        const auto& c = o.config;
        table << r + 1 << ',' << o.trial << ',' << fmt(o.val_hr10) << ',' << fmt(o.val_ndcg10) << ','
              << o.best_epoch << ',' << c.dim << ',' << to_string(c.base_loss) << ','
              << to_string(c.sampling) << ',' << c.n_neg << ',' << c.batch_size << ','
              << to_string(c.optimizer) << ',' << fmt(c.learning_rate) << ',' << c.n_user_protos
              << ',' << c.n_item_protos << ',' << fmt(c.reg.lambda_l2) << ',' << fmt(c.reg.lambda_1)
              << ',' << fmt(c.reg.lambda_2) << ',' << fmt(c.reg.lambda_3) << ','
              << fmt(c.reg.lambda_4) << ',' << fmt(c.reg.lambda_l1) << ',' << c.seed << '\n';
    }
    write_config_file((fs::path(args.out_dir) / "best_config.toml").string(), outcomes.front().config);

    RunManifest manifest;
    manifest.subcommand = "search";
    manifest.config = {{"model", sel.name},
                       {"space", args.space_path},
                       {"trials", args.trials},
                       {"parallel", args.parallel},
                       {"data_dir", args.data_dir}};
    manifest.seed = args.seed;
    manifest.input_fingerprints[args.space_path] = file_fingerprint(args.space_path);
    manifest.input_fingerprints[(fs::path(args.data_dir) / "idmap.tsv").string()] = data.fingerprint;
    manifest.outputs = {(fs::path(args.out_dir) / "trials.csv").string(),
                        (fs::path(args.out_dir) / "best_config.toml").string()};
    manifest.wall_ms = watch.ms();
    write_run_manifest(args.out_dir, manifest);

    if (!args.quiet)
        std::cout << "search done: best trial " << outcomes.front().trial << " with validation HR@10 "
                  << fmt(outcomes.front().val_hr10) << " -> " << args.out_dir << '\n';
}

void cmd_synth(const SynthArgs& args) {
    Stopwatch watch;
    SynthData data = generate(args.config);
    SplitBundle splits = leave_one_out_split(data.dataset, args.config.seed);
    write_split_files(args.out_dir, data.dataset, splits);
    write_labels_file(args.out_dir, data);

    RunManifest manifest;
    manifest.subcommand = "synth";
    manifest.config = {{"groups", args.config.n_groups},
                       {"users_per_group", args.config.users_per_group},
                       {"items_per_group", args.config.items_per_group},
                       {"p_in", args.config.p_in},
                       {"p_out", args.config.p_out},
                       {"dropped_users", data.dropped_users}};
    manifest.seed = args.config.seed;
    for (const char* f : {"idmap.tsv", "train.tsv", "valid.tsv", "test.tsv", "negatives.tsv", "labels.tsv"})
        manifest.outputs.push_back((fs::path(args.out_dir) / f).string());
    manifest.wall_ms = watch.ms();
    write_run_manifest(args.out_dir, manifest);

    if (!args.quiet)
        std::cout << "synth dataset: " << data.dataset.n_users << " users, " << data.dataset.n_items
                  << " items, " << data.dataset.interactions.size() << " interactions -> "
                  << args.out_dir << '\n';
}

}  // namespace uipc
