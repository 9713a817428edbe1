#include "uipc/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "uipc/config.hpp"

namespace uipc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_args(const std::string& body) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const std::size_t comma = body.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(trim(body.substr(pos)));
            break;
        }
        out.push_back(trim(body.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

double parse_num(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number in range spec: '" + s + "'");
    return v;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ParamSpec parse_param_spec(const std::string& text) {
    ParamSpec spec;
    const std::size_t open = text.find('(');
    if (open == std::string::npos || text.back() != ')') {
        spec.kind = ParamSpec::Kind::Fixed;
        spec.value = text;
        return spec;
    }
    const std::string fn = trim(text.substr(0, open));
    const std::string body = text.substr(open + 1, text.size() - open - 2);
    const auto args = split_args(body);
    if (fn == "choice") {
        if (args.empty() || args.front().empty())
            throw std::invalid_argument("choice() needs at least one option");
        spec.kind = ParamSpec::Kind::Choice;
        spec.choices = args;
        return spec;
    }
    if (args.size() != 2) throw std::invalid_argument(fn + "() needs exactly two bounds");
    spec.lo = parse_num(args[0]);
    spec.hi = parse_num(args[1]);
    if (!(spec.lo <= spec.hi)) throw std::invalid_argument(fn + "(): lower bound exceeds upper");
    if (fn == "loguniform") {
        if (!(spec.lo > 0.0)) throw std::invalid_argument("loguniform() needs positive bounds");
        spec.kind = ParamSpec::Kind::LogUniform;
    } else if (fn == "uniform") {
        spec.kind = ParamSpec::Kind::Uniform;
    } else if (fn == "int") {
        spec.kind = ParamSpec::Kind::IntRange;
    } else {
        throw std::invalid_argument("unknown range spec '" + fn + "'");
    }
    return spec;
}

std::string ParamSpec::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Fixed: return value;
        case Kind::Choice: return choices[rng.uniform_int(choices.size())];
        case Kind::Uniform: return fmt_double(rng.uniform(lo, hi));
        case Kind::LogUniform:
            return fmt_double(std::exp(rng.uniform(std::log(lo), std::log(hi))));
        case Kind::IntRange: {
            const long long a = static_cast<long long>(lo), b = static_cast<long long>(hi);
            return std::to_string(a + static_cast<long long>(rng.uniform_int(b - a + 1)));
        }
    }
    throw std::logic_error("unreachable param spec kind");
}

SearchSpace parse_search_space(const std::string& path) {
    SearchSpace space;
    for (const auto& [key, value] : parse_flat_file(path))
        space.emplace_back(key, parse_param_spec(value));
    if (space.empty()) throw std::runtime_error("search space is empty: " + path);
    return space;
}

TrainConfig sample_config(const SearchSpace& space, TrainConfig base, Rng& rng) {
    for (const auto& [key, spec] : space) apply_config_entry(base, key, spec.sample(rng));
    return base;
}

std::vector<TrialOutcome> random_search(const PreparedData& data, ModelKind kind,
                                        const TrainConfig& base, const SearchSpace& space,
                                        int n_trials, std::uint64_t seed, int parallel) {
    if (n_trials < 1) throw std::invalid_argument("random_search: n_trials must be >= 1");
    if (space.empty()) throw std::invalid_argument("random_search: empty search space");
    if (parallel < 1) parallel = 1;

    // configs drawn sequentially so the trial sequence is independent of the
    // worker count
    std::vector<TrialOutcome> outcomes(n_trials);
    for (int i = 0; i < n_trials; ++i) {
        Rng rng(derive_seed(seed, "trial", static_cast<std::uint64_t>(i)));
        outcomes[i].trial = i;
        outcomes[i].config = sample_config(space, base, rng);
        outcomes[i].config.seed = derive_seed(seed, "trial-train-seed", static_cast<std::uint64_t>(i));
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_trials) return;
            try {
                TrainResult result = train(data, kind, outcomes[i].config);
                outcomes[i].val_hr10 = result.log.best_hr10;
                outcomes[i].best_epoch = result.log.best_epoch;
                outcomes[i].val_ndcg10 = result.log.epochs[result.log.best_epoch - 1].val_ndcg10;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (parallel == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < std::min(parallel, n_trials); ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::stable_sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) {
        if (a.val_hr10 != b.val_hr10) return a.val_hr10 > b.val_hr10;
        return a.trial < b.trial;
    });
    return outcomes;
}

}  // namespace uipc
