#pragma once

#include <cstdint>
#include <span>

#include <torch/torch.h>

namespace acs::losses {

/// Pixel counts from which IoU and Dice follow; additive across slices.
struct OverlapCounts {
    std::int64_t intersection = 0;
    std::int64_t predicted = 0;
    std::int64_t target = 0;

    OverlapCounts& operator+=(const OverlapCounts& o) {
        intersection += o.intersection;
        predicted += o.predicted;
        target += o.target;
        return *this;
    }

    /// |I| / |U|; 1.0 when both masks are empty.
    [[nodiscard]] double iou() const;
    /// 2|I| / (|P| + |T|); 1.0 when both masks are empty.
    [[nodiscard]] double dice() const;
};

OverlapCounts overlap(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target);
/// Same, for equally shaped binary tensors (any dtype, values 0/1).
OverlapCounts overlap(const torch::Tensor& pred, const torch::Tensor& target);

double metric_iou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target);
double metric_dice(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target);

/// prob >= threshold, as a uint8 tensor.
torch::Tensor threshold(const torch::Tensor& prob, double level = 0.5);

}  // namespace acs::losses
