#pragma once

#include <memory>
#include <vector>

#include <torch/torch.h>

#include "acs/baselines/networks.hpp"
#include "acs/data/types.hpp"

namespace acs::baselines {

/// Per-parameter importance aligned to a network's parameter names.
struct ImportanceMap {
    models::NamedTensors values;

    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
};

/// Raw (unnormalised) MAS importance: for every sample the surrogate is the
/// squared L2 norm of the output logits divided by the parameter count; the
/// importance of a parameter is the mean absolute gradient over samples.
/// `surrogate_scale` multiplies the surrogate (used to check scale invariance).
ImportanceMap mas_raw_importance(SegmentationNet& net, const torch::Tensor& images, double surrogate_scale = 1.0);

/// Global min-max normalisation to [0,1]. A constant map becomes all ones,
/// or all zeros when every value is zero.
ImportanceMap normalize_importance(const ImportanceMap& raw);

/// Normalised importance over every slice of the given datasets.
ImportanceMap mas_importance(SegmentationNet& net, const std::vector<const data::Dataset*>& old_data);
ImportanceMap mas_importance(SegmentationNet& net, const torch::Tensor& images, double surrogate_scale = 1.0);

/// lambda * sum_i imp_i * (theta_i - anchor_i)^2 over aligned names.
torch::Tensor mas_penalty(const models::NamedTensors& params, const models::NamedTensors& anchor,
                          const ImportanceMap& importance, double lambda);

/// Detached copies of the parameter values (the MAS anchor).
models::NamedTensors snapshot_parameters(const models::NamedTensors& params);

/// Pixel-averaged binary cross-entropy between the temperature-softened
/// teacher and student probabilities of the output layer.
torch::Tensor kd_output_loss(const torch::Tensor& student_logits, const torch::Tensor& teacher_logits,
                             double temperature);

/// Frozen copy of a network taken at the stage boundary.
class TeacherSnapshot {
public:
    explicit TeacherSnapshot(SegmentationNet& net);
    torch::Tensor logits(const torch::Tensor& images) const;
    [[nodiscard]] SegmentationNet& net() const { return *net_; }

private:
    std::unique_ptr<SegmentationNet> net_;
};

}  // namespace acs::baselines
