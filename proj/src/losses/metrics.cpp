#include "acs/losses/metrics.hpp"

#include "acs/errors.hpp"

namespace acs::losses {

double OverlapCounts::iou() const {
    const auto uni = predicted + target - intersection;
    return uni == 0 ? 1.0 : static_cast<double>(intersection) / static_cast<double>(uni);
}

double OverlapCounts::dice() const {
    const auto total = predicted + target;
    return total == 0 ? 1.0 : 2.0 * static_cast<double>(intersection) / static_cast<double>(total);
}

OverlapCounts overlap(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target) {
    if (pred.size() != target.size()) throw ShapeError("metric inputs differ in size");
    OverlapCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] > 1 || target[i] > 1) throw InvalidArgument("metric inputs must be binary");
        c.intersection += pred[i] & target[i];
        c.predicted += pred[i];
        c.target += target[i];
    }
    return c;
}

OverlapCounts overlap(const torch::Tensor& pred, const torch::Tensor& target) {
    if (pred.sizes() != target.sizes()) throw ShapeError("metric inputs differ in shape");
    const auto p = pred.to(torch::kUInt8).contiguous();
    const auto t = target.to(torch::kUInt8).contiguous();
    return overlap(std::span<const std::uint8_t>(p.data_ptr<std::uint8_t>(), static_cast<std::size_t>(p.numel())),
                   std::span<const std::uint8_t>(t.data_ptr<std::uint8_t>(), static_cast<std::size_t>(t.numel())));
}

double metric_iou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target) {
    return overlap(pred, target).iou();
}

double metric_dice(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> target) {
    return overlap(pred, target).dice();
}

torch::Tensor threshold(const torch::Tensor& prob, double level) { return (prob >= level).to(torch::kUInt8); }

}  // namespace acs::losses
