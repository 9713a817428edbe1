#include <iostream>

#include "CLI11.hpp"
#include "uipc/commands.hpp"

// Command-line front end: prepare -> train -> evaluate -> explain, plus
// random search and a planted-structure synthesizer. Everything heavier than
// flag parsing lives in the library so the pipeline is testable in-process.
int main(int argc, char** argv) {
    CLI::App app{"UIPC-MF: prototype-based matrix factorization for explainable top-N recommendation"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    std::string out_dir;
    bool quiet = false;
    app.add_option("--seed", seed, "seed for every random decision of the subcommand");
    app.add_option("--out-dir", out_dir, "output directory (default depends on the subcommand)");
    app.add_flag("--quiet", quiet, "suppress progress output");

    // prepare
    uipc::PrepareArgs prepare;
    double threshold = 0.0;
    auto* prep = app.add_subcommand("prepare", "ingest, filter and split an interaction log");
    prep->add_option("--input", prepare.input, "delimited interaction log")->required();
    prep->add_option("--delimiter", prepare.schema.delimiter, "column delimiter (default tab; e.g. '::')");
    prep->add_option("--user-col", prepare.schema.user_col, "user column index");
    prep->add_option("--item-col", prepare.schema.item_col, "item column index");
    prep->add_option("--rating-col", prepare.schema.rating_col, "rating column index, -1 if absent");
    prep->add_option("--time-col", prepare.schema.time_col, "timestamp column index");
    prep->add_flag("--header", prepare.schema.has_header, "skip the first line");
    auto* thr = prep->add_option("--threshold", threshold, "keep rows with rating strictly above this");
    prep->add_option("--user-core", prepare.user_core, "minimum interactions per user");
    prep->add_option("--item-core", prepare.item_core, "minimum interactions per item");

    // train
    uipc::TrainArgs train;
    bool seed_given = false;
    auto* tr = app.add_subcommand("train", "train a model on a prepared directory");
    tr->add_option("--data", train.data_dir, "prepared data directory")->required();
    tr->add_option("--model", train.model, "mf | acf | protomf | uipc-mf | uipc-mf-l1");
    tr->add_option("--config", train.config_path, "flat key = value config file");

    // evaluate
    uipc::EvaluateArgs evaluate;
    std::string cutoffs = "5,10";
    auto* ev = app.add_subcommand("evaluate", "rank held-out items against their sampled negatives");
    ev->add_option("--model", evaluate.checkpoint_dir, "checkpoint directory")->required();
    ev->add_option("--data", evaluate.data_dir, "prepared data directory")->required();
    ev->add_option("--stage", evaluate.stage, "validation | test");
    ev->add_option("--k", cutoffs, "comma-separated cutoffs (default 5,10)");

    // explain
    uipc::ExplainArgs explain;
    auto* ex = app.add_subcommand("explain", "score decompositions, prototype profiles, preference stats");
    ex->add_option("--model", explain.checkpoint_dir, "uipc-mf checkpoint directory")->required();
    ex->add_option("--data", explain.data_dir, "prepared data directory")->required();
    ex->add_option("--user", explain.user_key, "raw user key for a per-pair explanation");
    ex->add_option("--item", explain.item_key, "raw item key for a per-pair explanation");
    ex->add_option("--top", explain.top, "prototypes (or items for --prototype) to report");
    ex->add_option("--items-per-proto", explain.items_per_prototype, "supporting items per prototype");
    ex->add_option("--prototype", explain.prototype, "item prototype for a nearest-items profile");
    ex->add_flag("--pref-dist", explain.pref_dist, "export per-prototype preference quartiles");
    ex->add_option("--metadata", explain.metadata_path, "item display sidecar (key<TAB>name)");
    ex->add_option("--template", explain.rationale_template, "rationale template with {items}/{prototype}");

    // search
    uipc::SearchArgs search;
    auto* se = app.add_subcommand("search", "random hyperparameter search ranked by validation HR@10");
    se->add_option("--data", search.data_dir, "prepared data directory")->required();
    se->add_option("--space", search.space_path, "search space file")->required();
    se->add_option("--model", search.model, "model kind to tune");
    se->add_option("--config", search.config_path, "base config for keys outside the space");
    se->add_option("--trials", search.trials, "number of sampled configurations")
        ->check(CLI::PositiveNumber);
    se->add_option("--parallel", search.parallel, "worker threads");

    // synth
    uipc::SynthArgs synth;
    auto* sy = app.add_subcommand("synth", "generate a planted block-structure dataset");
    sy->add_option("--groups", synth.config.n_groups, "number of groups");
    sy->add_option("--users-per-group", synth.config.users_per_group, "users per group");
    sy->add_option("--items-per-group", synth.config.items_per_group, "items per group");
    sy->add_option("--p-in", synth.config.p_in, "in-group interaction probability");
    sy->add_option("--p-out", synth.config.p_out, "cross-group interaction probability");

    CLI11_PARSE(app, argc, argv);
    seed_given = app.count("--seed") > 0;

    try {
        if (prep->parsed()) {
            prepare.seed = seed;
            prepare.quiet = quiet;
            if (thr->count() > 0) prepare.threshold = threshold;
            if (!out_dir.empty()) prepare.out_dir = out_dir;
            uipc::cmd_prepare(prepare);
        } else if (tr->parsed()) {
            if (seed_given) train.seed = seed;
            train.quiet = quiet;
            if (!out_dir.empty()) train.out_dir = out_dir;
            uipc::cmd_train(train);
        } else if (ev->parsed()) {
            evaluate.quiet = quiet;
            if (!out_dir.empty()) evaluate.out_dir = out_dir;
            evaluate.cutoffs.clear();
            std::size_t pos = 0;
            while (pos <= cutoffs.size()) {
                const std::size_t comma = cutoffs.find(',', pos);
                const std::string tok = cutoffs.substr(pos, comma == std::string::npos ? comma : comma - pos);
                if (!tok.empty()) evaluate.cutoffs.push_back(std::stoi(tok));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            uipc::cmd_evaluate(evaluate);
        } else if (ex->parsed()) {
            explain.quiet = quiet;
            if (!out_dir.empty()) explain.out_dir = out_dir;
            uipc::cmd_explain(explain);
        } else if (se->parsed()) {
            search.seed = seed;
            search.quiet = quiet;
            if (!out_dir.empty()) search.out_dir = out_dir;
            uipc::cmd_search(search);
        } else if (sy->parsed()) {
            synth.config.seed = seed;
            synth.quiet = quiet;
            if (!out_dir.empty()) synth.out_dir = out_dir;
            uipc::cmd_synth(synth);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
