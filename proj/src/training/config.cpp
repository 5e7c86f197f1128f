#include "acs/training/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "acs/data/synthetic.hpp"
#include "acs/errors.hpp"

namespace acs::training {
namespace {

using nlohmann::json;

template <typename T>
T read(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

const char* kDomainFields[] = {"intensity_gain",      "intensity_offset",  "noise_sigma",
                               "bias_field_strength", "texture_frequency", "lesion_probability"};

double& domain_field(data::DomainSpec& s, const std::string& f) {
    if (f == "intensity_gain") return s.intensity_gain;
    if (f == "intensity_offset") return s.intensity_offset;
    if (f == "noise_sigma") return s.noise_sigma;
    if (f == "bias_field_strength") return s.bias_field_strength;
    if (f == "texture_frequency") return s.texture_frequency;
    if (f == "lesion_probability") return s.lesion_probability;
    throw ConfigError("unknown domain field '" + f + "'");
}

}  // namespace

std::map<std::string, data::DomainSpec> default_domains() {
    // A: single scanner, mild noise, some lesions.
    // B: lower contrast, brighter baseline, stronger bias field, no lesions.
    // C: inverted contrast, several vendors (noisier, textured), frequent lesions.
    return {
        {"A", {1.0, 0.0, 0.03, 0.05, 3.0, 0.15}},
        {"B", {0.75, 0.2, 0.05, 0.15, 6.0, 0.0}},
        {"C", {-0.9, 0.95, 0.05, 0.1, 4.0, 0.3}},
    };
}

TrainConfig config_from_json(const json& flat) {
    if (!flat.is_object()) throw ConfigError("config must be a JSON object of flat keys");
    TrainConfig cfg;
    cfg.data.domains = default_domains();

    std::map<std::string, std::function<void(const json&, const std::string&)>> setters;
    auto num = [&](const char* key, auto& field) {
        using T = std::remove_reference_t<decltype(field)>;
        setters[key] = [&field](const json& v, const std::string& k) { field = read<T>(v, k); };
    };
    num("data.root", cfg.data.root);
    num("data.seed", cfg.data.seed);
    num("data.split_seed", cfg.data.split_seed);
    num("data.n_subjects", cfg.data.n_subjects);
    num("data.slices_per_subject", cfg.data.slices_per_subject);
    num("data.height", cfg.data.height);
    num("data.width", cfg.data.width);
    num("data.names", cfg.data.names);
    num("arch.base_width", cfg.arch.base_width);
    num("arch.ls_channels", cfg.arch.ls_channels);
    num("arch.negative_slope", cfg.arch.negative_slope);
    num("arch.cbin_epsilon", cfg.arch.cbin_epsilon);
    num("loss.eta", cfg.weights.eta);
    num("loss.w_vae", cfg.weights.w_vae);
    num("loss.w_gan", cfg.weights.w_gan);
    num("loss.w_lr", cfg.weights.w_lr);
    num("loss.w_adv_c", cfg.weights.w_adv_c);
    num("loss.w_seg", cfg.weights.w_seg);
    num("loss.w_dice", cfg.weights.w_dice);
    num("loss.prob_clamp", cfg.constants.prob_clamp);
    num("loss.dice_smoothing", cfg.constants.dice_smoothing);
    num("loss.threshold", cfg.constants.threshold);
    num("loss.enable_adv_c", cfg.toggles.adv_c);
    num("loss.enable_vae", cfg.toggles.vae);
    num("loss.enable_gan", cfg.toggles.gan);
    num("loss.enable_lr", cfg.toggles.lr);
    num("optim.lr", cfg.optim.lr);
    num("optim.beta1", cfg.optim.beta1);
    num("optim.beta2", cfg.optim.beta2);
    num("optim.eps", cfg.optim.eps);
    num("optim.disc_steps_per_main", cfg.optim.disc_steps_per_main);
    num("train.batch_size", cfg.batch_size);
    num("train.epochs_stage1", cfg.epochs_stage1);
    num("train.epochs_stage2", cfg.epochs_stage2);
    num("train.eval_every", cfg.eval_every);
    num("train.checkpoint_every", cfg.checkpoint_every);
    num("train.schedule", cfg.schedule);
    num("baseline.mas_lambda", cfg.mas_lambda);
    num("baseline.kd_weight", cfg.kd_weight);
    num("baseline.kd_temperature", cfg.kd_temperature);
    num("harness.shared_pretrain", cfg.shared_pretrain);

    const std::string domain_prefix = "data.domain.";
    for (const auto& [key, value] : flat.items()) {
        if (key.rfind(domain_prefix, 0) == 0) {
            const auto rest = key.substr(domain_prefix.size());
            const auto dot = rest.find('.');
            if (dot == std::string::npos) throw ConfigError("domain key '" + key + "' needs <name>.<field>");
            domain_field(cfg.data.domains[rest.substr(0, dot)], rest.substr(dot + 1)) = read<double>(value, key);
            continue;
        }
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(value, key);
    }
    cfg.arch.height = cfg.data.height;
    cfg.arch.width = cfg.data.width;
    validate(cfg);
    return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    try {
        return config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
}

json config_to_json(const TrainConfig& cfg) {
    json j = {
        {"data.root", cfg.data.root},
        {"data.seed", cfg.data.seed},
        {"data.split_seed", cfg.data.split_seed},
        {"data.n_subjects", cfg.data.n_subjects},
        {"data.slices_per_subject", cfg.data.slices_per_subject},
        {"data.height", cfg.data.height},
        {"data.width", cfg.data.width},
        {"data.names", cfg.data.names},
        {"arch.base_width", cfg.arch.base_width},
        {"arch.ls_channels", cfg.arch.ls_channels},
        {"arch.negative_slope", cfg.arch.negative_slope},
        {"arch.cbin_epsilon", cfg.arch.cbin_epsilon},
        {"loss.eta", cfg.weights.eta},
        {"loss.w_vae", cfg.weights.w_vae},
        {"loss.w_gan", cfg.weights.w_gan},
        {"loss.w_lr", cfg.weights.w_lr},
        {"loss.w_adv_c", cfg.weights.w_adv_c},
        {"loss.w_seg", cfg.weights.w_seg},
        {"loss.w_dice", cfg.weights.w_dice},
        {"loss.prob_clamp", cfg.constants.prob_clamp},
        {"loss.dice_smoothing", cfg.constants.dice_smoothing},
        {"loss.threshold", cfg.constants.threshold},
        {"loss.enable_adv_c", cfg.toggles.adv_c},
        {"loss.enable_vae", cfg.toggles.vae},
        {"loss.enable_gan", cfg.toggles.gan},
        {"loss.enable_lr", cfg.toggles.lr},
        {"optim.lr", cfg.optim.lr},
        {"optim.beta1", cfg.optim.beta1},
        {"optim.beta2", cfg.optim.beta2},
        {"optim.eps", cfg.optim.eps},
        {"optim.disc_steps_per_main", cfg.optim.disc_steps_per_main},
        {"train.batch_size", cfg.batch_size},
        {"train.epochs_stage1", cfg.epochs_stage1},
        {"train.epochs_stage2", cfg.epochs_stage2},
        {"train.eval_every", cfg.eval_every},
        {"train.checkpoint_every", cfg.checkpoint_every},
        {"train.schedule", cfg.schedule},
        {"baseline.mas_lambda", cfg.mas_lambda},
        {"baseline.kd_weight", cfg.kd_weight},
        {"baseline.kd_temperature", cfg.kd_temperature},
        {"harness.shared_pretrain", cfg.shared_pretrain},
    };
    for (const auto& [name, spec] : cfg.data.domains) {
        auto copy = spec;
        for (const char* f : kDomainFields) j["data.domain." + name + "." + f] = domain_field(copy, f);
    }
    return j;
}

void validate(const TrainConfig& cfg) {
    models::validate(cfg.arch);
    losses::validate(cfg.weights);
    if (cfg.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (cfg.epochs_stage1 < 0 || cfg.epochs_stage2 < 0) throw ConfigError("epoch counts must be >= 0");
    if (cfg.eval_every < 1) throw ConfigError("train.eval_every must be >= 1");
    if (cfg.checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
    if (!(cfg.optim.lr > 0.0)) throw ConfigError("optim.lr must be > 0");
    if (cfg.optim.disc_steps_per_main < 1) throw ConfigError("optim.disc_steps_per_main must be >= 1");
    if (!(cfg.kd_temperature > 0.0)) throw ConfigError("baseline.kd_temperature must be > 0");
    if (cfg.mas_lambda < 0.0 || cfg.kd_weight < 0.0) throw ConfigError("regularizer weights must be >= 0");
    if (!(cfg.constants.prob_clamp > 0.0 && cfg.constants.prob_clamp < 0.5)) {
        throw ConfigError("loss.prob_clamp must lie in (0, 0.5)");
    }
    std::set<std::string> seen;
    for (const auto& n : cfg.data.names) {
        if (!seen.insert(n).second) throw ConfigError("duplicate dataset name '" + n + "'");
        if (cfg.data.root.empty()) {
            const auto it = cfg.data.domains.find(n);
            if (it == cfg.data.domains.end()) throw ConfigError("no synthetic domain spec for dataset '" + n + "'");
            try {
                data::validate_domain_spec(it->second);
            } catch (const Error& e) {
                throw ConfigError("domain '" + n + "': " + e.what());
            }
        }
    }
    if (cfg.data.root.empty()) {
        for (std::size_t i = 0; i < cfg.data.names.size(); ++i) {
            for (std::size_t k = i + 1; k < cfg.data.names.size(); ++k) {
                if (cfg.data.domains.at(cfg.data.names[i]) == cfg.data.domains.at(cfg.data.names[k])) {
                    throw ConfigError("domains '" + cfg.data.names[i] + "' and '" + cfg.data.names[k] +
                                      "' are identical");
                }
            }
        }
    }
}

}  // namespace acs::training
