#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "acs/models/bundle.hpp"
#include "acs/training/common.hpp"
#include "acs/training/config.hpp"
#include "acs/training/data_pool.hpp"
#include "acs/training/optim_state.hpp"

namespace acs::training {

using models::ModelBundle;

struct StagePlan {
    int stage_id = 1;
    std::vector<std::string> datasets;
    int epochs = 30;
    /// Epochs already completed before this stage (global epoch numbering).
    int first_epoch = 0;
    /// Parameter names this stage may update; filled by select_trainable when empty.
    std::set<std::string> trainable;
};

/// Stage 1: every registered parameter. Stage 2: exactly the weight and bias
/// of the last four convolutions of S.
std::set<std::string> select_trainable(ModelBundle& bundle, const StagePlan& plan);

struct DiscriminatorLosses {
    double d_d = 0;
    double d_c = 0;
};

struct MainLosses {
    double seg = 0;
    double vae = 0;
    double gan_g = 0;
    double lr = 0;
    double adv_e = 0;
    double total = 0;
};

/// Optimiser groups used by the ACS steps.
inline constexpr const char* kDiscGroup = "disc";
inline constexpr const char* kMainGroup = "main";
inline constexpr const char* kFinetuneGroup = "finetune";

/// Registers the "disc" and "main" groups for stage 1.
void prepare_stage1_optim(ModelBundle& bundle, OptimState& opt);

/// Updates D_d and D_c only. Real pairs (x, d) versus generated images built
/// from z_c of x and z ~ N(0,1); D_c sees real representations labelled by
/// domain and re-encoded generated images labelled as the placeholder class.
DiscriminatorLosses step_discriminators(ModelBundle& bundle, const TensorBatch& batch, const TrainConfig& cfg,
                                        OptimState& opt, const StagePlan& plan);

/// One step on E_c, E_d, LS, G and S with the discriminators frozen.
/// Returns the unweighted components.
MainLosses step_main(ModelBundle& bundle, const TensorBatch& batch, const TrainConfig& cfg, OptimState& opt,
                     const StagePlan& plan);

struct StageOptions {
    EpochHook on_epoch;
    std::optional<std::filesystem::path> checkpoint_dir;
};

/// Disentanglement stage on >= 2 simultaneously available datasets: for every
/// interleaved batch one discriminator step, then one main step.
TrainingLog run_stage1(ModelBundle& bundle, StagePlan plan, DataPool& data, const TrainConfig& cfg, OptimState& opt,
                       std::uint64_t seed, const StageOptions& options = {});

/// Fine-tunes the last four convolutions of S on the new dataset(s) with the
/// segmentation loss only; everything else stays bit-identical.
TrainingLog run_stage2(ModelBundle& bundle, StagePlan plan, DataPool& data, const TrainConfig& cfg, OptimState& opt,
                       std::uint64_t seed, const StageOptions& options = {});

/// Seeds the global RNG and builds a fresh bundle for `n_domains` stage-1 domains.
ModelBundle make_bundle(const TrainConfig& cfg, std::int64_t n_domains, std::uint64_t seed);

/// Logits of the segmentation path E_c -> S.
LogitsFn acs_logits(ModelBundle& bundle);

/// Hash of the raw bytes of every parameter in a collection.
std::uint64_t hash_parameters(const models::NamedTensors& params);
std::uint64_t hash_collection(ModelBundle& bundle, models::Collection c);

}  // namespace acs::training
