#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "acs/data/types.hpp"
#include "acs/losses/losses.hpp"
#include "acs/models/architecture.hpp"

namespace acs::training {

struct OptimConfig {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int disc_steps_per_main = 1;
};

/// Ablation switches for the four loss families of the main objective.
struct LossToggles {
    bool adv_c = true;
    bool vae = true;
    bool gan = true;
    bool lr = true;

    friend bool operator==(const LossToggles&, const LossToggles&) = default;
};

/// The three built-in synthetic domains (A, B, C) used by the desk profile.
std::map<std::string, data::DomainSpec> default_domains();

struct DataConfig {
    /// Directory holding one saved dataset per name; empty means "generate synthetic data".
    std::string root;
    std::uint64_t seed = 7;
    std::uint64_t split_seed = 11;
    int n_subjects = 12;
    int slices_per_subject = 8;
    std::int64_t height = 32;
    std::int64_t width = 32;
    std::vector<std::string> names = {"A", "B", "C"};
    std::map<std::string, data::DomainSpec> domains = default_domains();
};

struct TrainConfig {
    DataConfig data;
    models::ArchConfig arch;
    losses::LossWeights weights;
    losses::LossConstants constants;
    LossToggles toggles;
    OptimConfig optim;

    int batch_size = 16;
    int epochs_stage1 = 30;
    int epochs_stage2 = 30;
    int eval_every = 5;
    int checkpoint_every = 0;
    std::string schedule = "AB-C";

    double mas_lambda = 1.0;
    double kd_weight = 1.0;
    double kd_temperature = 2.0;

    bool shared_pretrain = true;
};

/// Reads flat namespaced keys ("train.batch_size", "data.domain.A.noise_sigma", ...).
/// Unknown keys are rejected. Missing keys keep their defaults.
TrainConfig config_from_json(const nlohmann::json& flat);
TrainConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const TrainConfig& cfg);

/// Throws ConfigError on any out-of-range value.
void validate(const TrainConfig& cfg);

}  // namespace acs::training
