#include "uipc/checkpoint.hpp"

#include <bit>
#include <filesystem>
#include <fstream>

#include "uipc/baselines.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace uipc {

namespace {

constexpr int kFormatVersion = 1;

void write_tensor(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tensor file " + path.string());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!out) throw std::runtime_error("tensor write failed: " + path.string());
}

void read_tensor(const std::filesystem::path& path, Matrix& m) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor file " + path.string());
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double)))
        throw std::runtime_error("tensor file truncated: " + path.string());
    char extra;
    if (in.read(&extra, 1), in.gcount() != 0)
        throw std::runtime_error("tensor file larger than its declared shape: " + path.string());
}

}  // namespace

void save_checkpoint(const std::string& dir, const Model& model, const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    nlohmann::json manifest = extra;
    manifest["format_version"] = kFormatVersion;
    manifest["model_kind"] = to_string(model.kind());
    manifest["n_users"] = model.n_users();
    manifest["n_items"] = model.n_items();
    manifest["dim"] = model.dim();

    int n_user_protos = 0, n_item_protos = 0;
    if (const auto* u = dynamic_cast<const UipcModel*>(&model)) {
        n_user_protos = u->n_user_protos();
        n_item_protos = u->n_item_protos();
    } else if (const auto* p = dynamic_cast<const ProtoMfModel*>(&model)) {
        n_user_protos = p->n_user_protos();
        n_item_protos = p->n_item_protos();
    } else if (const auto* a = dynamic_cast<const AcfModel*>(&model)) {
        n_user_protos = a->n_anchors();
        n_item_protos = a->n_anchors();
    }
    manifest["n_user_prototypes"] = n_user_protos;
    manifest["n_item_prototypes"] = n_item_protos;

    const auto tensors = model.tensors();
    const auto names = model.tensor_names();
    nlohmann::json tensor_list = nlohmann::json::array();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const std::string file = names[i] + ".bin";
        tensor_list.push_back({{"name", names[i]},
                               {"file", file},
                               {"rows", tensors[i]->rows()},
                               {"cols", tensors[i]->cols()}});
        write_tensor(base / file, *tensors[i]);
    }
    manifest["tensors"] = tensor_list;

    std::ofstream out(base / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (base / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
    const std::filesystem::path base(dir);
    std::ifstream in(base / "manifest.json", std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint manifest " + (base / "manifest.json").string());
    nlohmann::json manifest = nlohmann::json::parse(in);

    if (manifest.at("format_version").get<int>() != kFormatVersion)
        throw std::runtime_error("unsupported checkpoint format version");
    const ModelKind kind = model_kind_from_string(manifest.at("model_kind").get<std::string>());
    const int n_users = manifest.at("n_users").get<int>();
    const int n_items = manifest.at("n_items").get<int>();
    const int dim = manifest.at("dim").get<int>();
    const int lu = manifest.at("n_user_prototypes").get<int>();
    const int lt = manifest.at("n_item_prototypes").get<int>();

    std::unique_ptr<Model> model;
    switch (kind) {
        case ModelKind::MF: model = std::make_unique<MfModel>(n_users, n_items, dim); break;
        case ModelKind::ACF: model = std::make_unique<AcfModel>(n_users, n_items, lu, dim); break;
        case ModelKind::ProtoMF:
            model = std::make_unique<ProtoMfModel>(n_users, n_items, lu, lt, dim);
            break;
        case ModelKind::UipcMF:
            model = std::make_unique<UipcModel>(n_users, n_items, lu, lt, dim);
            break;
    }

    const auto tensors = model->tensors();
    const auto names = model->tensor_names();
    const auto& tensor_list = manifest.at("tensors");
    if (tensor_list.size() != tensors.size())
        throw std::runtime_error("checkpoint tensor count does not match model kind");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& entry = tensor_list[i];
        if (entry.at("name").get<std::string>() != names[i])
            throw std::runtime_error("checkpoint tensor order mismatch at '" +
                                     entry.at("name").get<std::string>() + "'");
        if (entry.at("rows").get<int>() != tensors[i]->rows() ||
            entry.at("cols").get<int>() != tensors[i]->cols())
            throw std::runtime_error("checkpoint tensor shape mismatch for '" + names[i] + "'");
        read_tensor(base / entry.at("file").get<std::string>(), *tensors[i]);
    }
    return {std::move(model), std::move(manifest)};
}

}  // namespace uipc
