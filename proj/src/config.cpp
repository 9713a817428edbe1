#include "uipc/config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace uipc {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& v, const std::string& key) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_flat_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = unquote(trim(t.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty key or value");
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

void apply_config_entry(TrainConfig& c, const std::string& key, const std::string& value) {
    if (key == "embedding_size") c.dim = static_cast<int>(to_int(value, key));
    else if (key == "lambda_l2") c.reg.lambda_l2 = to_double(value, key);
    else if (key == "base_loss") c.base_loss = base_loss_from_string(value);
    else if (key == "sampling") c.sampling = sampling_mode_from_string(value);
    else if (key == "neg_samples") c.n_neg = static_cast<int>(to_int(value, key));
    else if (key == "batch_size") c.batch_size = static_cast<int>(to_int(value, key));
    else if (key == "optimizer") c.optimizer = optimizer_from_string(value);
    else if (key == "lr") c.learning_rate = to_double(value, key);
    else if (key == "user_prototypes") c.n_user_protos = static_cast<int>(to_int(value, key));
    else if (key == "item_prototypes") c.n_item_protos = static_cast<int>(to_int(value, key));
    else if (key == "lambda_1") c.reg.lambda_1 = to_double(value, key);
    else if (key == "lambda_2") c.reg.lambda_2 = to_double(value, key);
    else if (key == "lambda_3") c.reg.lambda_3 = to_double(value, key);
    else if (key == "lambda_4") c.reg.lambda_4 = to_double(value, key);
    else if (key == "lambda_l1") c.reg.lambda_l1 = to_double(value, key);
    else if (key == "max_epochs") c.max_epochs = static_cast<int>(to_int(value, key));
    else if (key == "patience") c.patience = static_cast<int>(to_int(value, key));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(value, key));
    else if (key == "l2_squared") c.l2_squared = to_bool(value, key);
    else if (key == "log_every") c.log_every = static_cast<int>(to_int(value, key));
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

TrainConfig config_from_file(const std::string& path, TrainConfig defaults) {
    for (const auto& [key, value] : parse_flat_file(path)) apply_config_entry(defaults, key, value);
    return defaults;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_config_file(const std::string& path, const TrainConfig& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << "embedding_size = " << c.dim << '\n'
        << "lambda_l2 = " << fmt_double(c.reg.lambda_l2) << '\n'
        << "base_loss = " << to_string(c.base_loss) << '\n'
        << "sampling = " << to_string(c.sampling) << '\n'
        << "neg_samples = " << c.n_neg << '\n'
        << "batch_size = " << c.batch_size << '\n'
        << "optimizer = " << to_string(c.optimizer) << '\n'
        << "lr = " << fmt_double(c.learning_rate) << '\n'
        << "user_prototypes = " << c.n_user_protos << '\n'
        << "item_prototypes = " << c.n_item_protos << '\n'
        << "lambda_1 = " << fmt_double(c.reg.lambda_1) << '\n'
        << "lambda_2 = " << fmt_double(c.reg.lambda_2) << '\n'
        << "lambda_3 = " << fmt_double(c.reg.lambda_3) << '\n'
        << "lambda_4 = " << fmt_double(c.reg.lambda_4) << '\n'
        << "lambda_l1 = " << fmt_double(c.reg.lambda_l1) << '\n'
        << "max_epochs = " << c.max_epochs << '\n'
        << "patience = " << c.patience << '\n'
        << "seed = " << c.seed << '\n'
        << "l2_squared = " << (c.l2_squared ? "true" : "false") << '\n'
        << "log_every = " << c.log_every << '\n';
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"embedding_size", c.dim},
            {"lambda_l2", c.reg.lambda_l2},
            {"base_loss", to_string(c.base_loss)},
            {"sampling", to_string(c.sampling)},
            {"neg_samples", c.n_neg},
            {"batch_size", c.batch_size},
            {"optimizer", to_string(c.optimizer)},
            {"lr", c.learning_rate},
            {"user_prototypes", c.n_user_protos},
            {"item_prototypes", c.n_item_protos},
            {"lambda_1", c.reg.lambda_1},
            {"lambda_2", c.reg.lambda_2},
            {"lambda_3", c.reg.lambda_3},
            {"lambda_4", c.reg.lambda_4},
            {"lambda_l1", c.reg.lambda_l1},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"seed", c.seed},
            {"l2_squared", c.l2_squared},
            {"log_every", c.log_every}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.dim = j.at("embedding_size").get<int>();
    c.reg.lambda_l2 = j.at("lambda_l2").get<double>();
    c.base_loss = base_loss_from_string(j.at("base_loss").get<std::string>());
    c.sampling = sampling_mode_from_string(j.at("sampling").get<std::string>());
    c.n_neg = j.at("neg_samples").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    c.learning_rate = j.at("lr").get<double>();
    c.n_user_protos = j.at("user_prototypes").get<int>();
    c.n_item_protos = j.at("item_prototypes").get<int>();
    c.reg.lambda_1 = j.at("lambda_1").get<double>();
    c.reg.lambda_2 = j.at("lambda_2").get<double>();
    c.reg.lambda_3 = j.at("lambda_3").get<double>();
    c.reg.lambda_4 = j.at("lambda_4").get<double>();
    c.reg.lambda_l1 = j.at("lambda_l1").get<double>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.l2_squared = j.at("l2_squared").get<bool>();
    c.log_every = j.at("log_every").get<int>();
    return c;
}

}  // namespace uipc
