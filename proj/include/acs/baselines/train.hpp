#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acs/baselines/networks.hpp"
#include "acs/baselines/regularizers.hpp"
#include "acs/training/common.hpp"
#include "acs/training/config.hpp"
#include "acs/training/data_pool.hpp"
#include "acs/training/optim_state.hpp"
#include "acs/training/stages.hpp"

namespace acs::baselines {

enum class Method { UNet, UNetB, MAS, OLKD };

/// "unet", "unet-b", "mas", "ol-kd".
const char* method_name(Method m);
Method method_from_name(const std::string& name);
/// Network kind a method trains ("unet" for U-Net, MAS and OL-KD).
std::string network_kind(Method m);

/// Which datasets each stage trains on; an empty stage 2 means joint training.
struct StageDatasets {
    std::vector<std::string> stage1;
    std::vector<std::string> stage2;
    int epochs_stage1 = 30;
    int epochs_stage2 = 30;
};

inline constexpr const char* kSegGroup = "seg";

/// Extra loss added to the segmentation loss in stage 2. `term` returns the
/// unweighted value; with weight 0 it is only evaluated for logging.
struct Regularizer {
    double weight = 0;
    std::function<torch::Tensor(const training::TensorBatch&, const torch::Tensor& logits)> term;
};

/// One segmentation-only stage over interleaved batches of `datasets`,
/// updating every parameter of `net` through optimiser group "seg" (created
/// fresh). Evaluates validation IoU/Dice per dataset after every epoch.
training::TrainingLog train_segmentation_stage(SegmentationNet& net, const std::vector<std::string>& datasets,
                                               training::DataPool& data, const training::TrainConfig& cfg,
                                               training::OptimState& opt, int stage, int first_epoch, int epochs,
                                               std::uint64_t seed, const Regularizer& reg = {},
                                               const training::StageOptions& options = {});

/// Stage 1 of every baseline: pooled training on the initial datasets.
training::TrainingLog baseline_stage1(SegmentationNet& net, const StageDatasets& plan, training::DataPool& data,
                                      const training::TrainConfig& cfg, training::OptimState& opt, std::uint64_t seed,
                                      const training::StageOptions& options = {});

/// Stage 2: captures the boundary state the method needs (MAS importance on
/// the old training data, or the KD teacher), releases the old datasets and
/// fine-tunes every parameter on the new ones.
training::TrainingLog baseline_stage2(Method method, SegmentationNet& net, const StageDatasets& plan,
                                      training::DataPool& data, const training::TrainConfig& cfg,
                                      training::OptimState& opt, std::uint64_t seed,
                                      const training::StageOptions& options = {});

struct BaselineRun {
    training::TrainingLog log;
    std::unique_ptr<SegmentationNet> net;
};

/// Full two-stage run of a method from a fresh network seeded with `seed`.
BaselineRun train_baseline(Method method, const training::TrainConfig& cfg, training::DataPool& data,
                           const StageDatasets& plan, std::uint64_t seed, const training::StageOptions& options = {});

BaselineRun train_unet(const training::TrainConfig& cfg, training::DataPool& data, const StageDatasets& plan,
                       std::uint64_t seed, const training::StageOptions& options = {});
BaselineRun train_unet_b(const training::TrainConfig& cfg, training::DataPool& data, const StageDatasets& plan,
                         std::uint64_t seed, const training::StageOptions& options = {});
/// `method` must be MAS or OLKD.
BaselineRun train_with_regularizer(const training::TrainConfig& cfg, training::DataPool& data,
                                   const StageDatasets& plan, std::uint64_t seed, Method method,
                                   const training::StageOptions& options = {});

training::LogitsFn net_logits(SegmentationNet& net);

}  // namespace acs::baselines
