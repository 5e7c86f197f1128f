#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "acs/data/types.hpp"
#include "acs/losses/losses.hpp"
#include "acs/losses/metrics.hpp"
#include "acs/training/data_pool.hpp"

namespace acs::training {

/// Tensors for one optimisation step.
struct TensorBatch {
    torch::Tensor images;   ///< [N,1,H,W]
    torch::Tensor masks;    ///< [N,1,H,W], 0/1 in the image dtype
    torch::Tensor domains;  ///< [N] local domain index (position in the stage's dataset list)
};

/// One index list per active dataset; entry k indexes into dataset k's slices.
struct MixedBatch {
    std::vector<std::vector<std::size_t>> per_dataset;
};

/// Round-robin interleaving: each dataset is shuffled and cut into
/// sub-batches of max(1, batch_size / n_datasets); step s takes sub-batch s of
/// every dataset that still has one. Pure function of (sizes, batch, seed, epoch).
std::vector<MixedBatch> interleaved_batches(const std::vector<std::size_t>& dataset_sizes,
                                            const std::vector<int>& dataset_keys, int batch_size,
                                            std::uint64_t seed, int epoch);

TensorBatch collate(const std::vector<const data::Dataset*>& datasets, const MixedBatch& batch,
                    torch::Dtype dtype = torch::kFloat32);

/// Stacks a whole dataset (or a range of it) for evaluation.
TensorBatch collate_range(const data::Dataset& ds, std::size_t begin, std::size_t end,
                          torch::Dtype dtype = torch::kFloat32);

using LogitsFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// Dataset-level IoU/Dice from pixel counts pooled over every slice.
losses::OverlapCounts evaluate(const LogitsFn& logits, const data::Dataset& ds, double threshold = 0.5);

/// Loss components of one logged step; fields a method does not use stay 0.
struct StepRecord {
    std::int64_t step = 0;
    int stage = 0;
    int epoch = 0;
    double seg = 0, vae = 0, gan_g = 0, lr = 0, adv_e = 0, d_d = 0, d_c = 0, reg = 0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EvalRecord {
    int stage = 0;
    int epoch = 0;
    std::string dataset;
    std::string split;
    double iou = 0;
    double dice = 0;

    friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct TrainingLog {
    std::vector<StepRecord> steps;
    std::vector<EvalRecord> evals;

    void append(const TrainingLog& other);
    /// step,stage,epoch,seg,vae,gan_g,lr,adv_e,d_d,d_c,reg
    [[nodiscard]] std::string steps_csv() const;
    /// stage,epoch,dataset,split,iou,dice
    [[nodiscard]] std::string evals_csv() const;
    void write(const std::filesystem::path& dir) const;

    friend bool operator==(const TrainingLog&, const TrainingLog&) = default;
};

/// Called after every completed epoch with (stage, global epoch).
using EpochHook = std::function<void(int stage, int epoch)>;

/// Raised when a loss component is NaN or infinite; names the component.
class NonFiniteLossError : public Error {
public:
    NonFiniteLossError(const std::string& component, double value);
    [[nodiscard]] const std::string& component() const { return component_; }

private:
    std::string component_;
};

void check_finite(const std::string& component, double value);

/// Formats a double with round-trip precision, independent of locale.
std::string format_number(double v);

}  // namespace acs::training
