#include "acs/models/bundle.hpp"

#include <set>

#include "acs/errors.hpp"
#include "acs/models/checkpoint.hpp"
#include "acs/models/rng_guard.hpp"

namespace acs::models {

std::string_view collection_name(Collection c) {
    switch (c) {
        case Collection::ContentEncoder: return "E_c";
        case Collection::DomainEncoder: return "E_d";
        case Collection::LatentScale: return "LS";
        case Collection::Generator: return "G";
        case Collection::DomainDiscriminator: return "D_d";
        case Collection::ContentDiscriminator: return "D_c";
        case Collection::Segmenter: return "S";
    }
    throw InvalidArgument("unknown collection");
}

Collection collection_from_name(std::string_view name) {
    for (Collection c : kAllCollections) {
        if (collection_name(c) == name) return c;
    }
    throw InvalidArgument("unknown collection '" + std::string(name) + "'");
}

bool is_discriminator(Collection c) {
    return c == Collection::DomainDiscriminator || c == Collection::ContentDiscriminator;
}

ModelBundle::ModelBundle(const ArchConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    content_encoder = ContentEncoder(cfg_);
    domain_encoder = DomainEncoder(cfg_);
    latent_scale = LatentScale(cfg_);
    generator = Generator(cfg_);
    domain_discriminator = DomainDiscriminator(cfg_);
    content_discriminator = ContentDiscriminator(cfg_);
    segmenter = Segmenter(cfg_);
    for (Collection c : kAllCollections) trainable_[c] = true;
}

torch::nn::Module& ModelBundle::module(Collection c) {
    switch (c) {
        case Collection::ContentEncoder: return *content_encoder;
        case Collection::DomainEncoder: return *domain_encoder;
        case Collection::LatentScale: return *latent_scale;
        case Collection::Generator: return *generator;
        case Collection::DomainDiscriminator: return *domain_discriminator;
        case Collection::ContentDiscriminator: return *content_discriminator;
        case Collection::Segmenter: return *segmenter;
    }
    throw InvalidArgument("unknown collection");
}

NamedTensors ModelBundle::collection_parameters(Collection c) {
    NamedTensors out;
    const std::string prefix = std::string(collection_name(c)) + ".";
    for (const auto& item : module(c).named_parameters(/*recurse=*/true)) {
        out.emplace_back(prefix + item.key(), item.value());
    }
    return out;
}

NamedTensors ModelBundle::named_parameters() {
    NamedTensors out;
    for (Collection c : kAllCollections) {
        auto part = collection_parameters(c);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

std::vector<std::string> ModelBundle::segmenter_layer_names() const {
    std::vector<std::string> names;
    for (const auto& n : segmenter->layer_names()) names.push_back("S." + n);
    return names;
}

std::vector<std::string> ModelBundle::finetune_layer_names() const {
    const auto all = segmenter_layer_names();
    return {all.end() - kFinetuneLayers, all.end()};
}

std::vector<std::string> ModelBundle::finetune_parameter_names() const {
    std::vector<std::string> names;
    for (const auto& layer : finetune_layer_names()) {
        names.push_back(layer + ".weight");
        names.push_back(layer + ".bias");
    }
    return names;
}

nlohmann::json ModelBundle::manifest() {
    nlohmann::json m;
    m["format_version"] = kCheckpointFormatVersion;
    m["model"] = "acs";
    m["architecture"] = to_json(cfg_);
    m["layers"] = layer_list(named_parameters());
    nlohmann::json flags = nlohmann::json::object();
    for (Collection c : kAllCollections) flags[std::string(collection_name(c))] = trainable_.at(c);
    m["trainable"] = flags;
    m["segmenter_layers"] = segmenter_layer_names();
    m["finetune_layers"] = finetune_layer_names();
    m["completed_stage"] = completed_stage;
    return m;
}

void ModelBundle::to(torch::Dtype dtype) {
    for (Collection c : kAllCollections) module(c).to(dtype);
}

void ModelBundle::copy_from(ModelBundle& other) {
    if (!(other.cfg_ == cfg_)) throw InvalidArgument("cannot copy parameters between different architectures");
    torch::NoGradGuard no_grad;
    auto mine = named_parameters();
    auto theirs = other.named_parameters();
    for (std::size_t i = 0; i < mine.size(); ++i) mine[i].second.copy_(theirs[i].second);
}

ModelBundle ModelBundle::clone() {
    ModelBundle copy = [&] {
        GlobalRngGuard guard;
        return ModelBundle(cfg_);
    }();
    copy.to(named_parameters().front().second.scalar_type());
    copy.copy_from(*this);
    copy.trainable_ = trainable_;
    copy.completed_stage = completed_stage;
    return copy;
}

void save_bundle(ModelBundle& bundle, const std::filesystem::path& path) {
    save_tensors(path, bundle.manifest(), bundle.named_parameters());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    const auto entries = read_archive(path);
    const auto it = entries.find("manifest.json");
    if (it == entries.end()) throw CheckpointError("checkpoint has no manifest.json");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(it->second);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("manifest.json is invalid: ") + e.what());
    }
    if (manifest.value("model", "") != "acs") throw CheckpointError("checkpoint does not hold an ACS bundle");

    ModelBundle bundle = [&] {
        GlobalRngGuard guard;
        return ModelBundle(arch_from_json(manifest.at("architecture")));
    }();
    auto params = bundle.named_parameters();
    load_tensors(path, params);
    if (manifest.contains("trainable")) {
        for (const auto& [name, flag] : manifest.at("trainable").items()) {
            bundle.set_trainable(collection_from_name(name), flag.get<bool>());
        }
    }
    bundle.completed_stage = manifest.value("completed_stage", 0);
    return bundle;
}

nlohmann::json to_json(const ArchConfig& cfg) {
    return {{"base_width", cfg.base_width}, {"n_domains", cfg.n_domains},       {"height", cfg.height},
            {"width", cfg.width},           {"ls_channels", cfg.ls_channels},   {"negative_slope", cfg.negative_slope},
            {"cbin_epsilon", cfg.cbin_epsilon}};
}

ArchConfig arch_from_json(const nlohmann::json& j) {
    try {
        ArchConfig cfg;
        cfg.base_width = j.at("base_width").get<std::int64_t>();
        cfg.n_domains = j.at("n_domains").get<std::int64_t>();
        cfg.height = j.at("height").get<std::int64_t>();
        cfg.width = j.at("width").get<std::int64_t>();
        cfg.ls_channels = j.at("ls_channels").get<std::int64_t>();
        cfg.negative_slope = j.at("negative_slope").get<double>();
        cfg.cbin_epsilon = j.at("cbin_epsilon").get<double>();
        validate(cfg);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("architecture block is invalid: ") + e.what());
    }
}

}  // namespace acs::models
