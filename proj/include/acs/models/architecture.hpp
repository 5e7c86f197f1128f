#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace acs::models {

/// Number of encoder levels; inputs must be divisible by 2^kDepth.
inline constexpr int kDepth = 4;
inline constexpr std::int64_t kSpatialDivisor = 1 << kDepth;

struct ArchConfig {
    std::int64_t base_width = 8;
    std::int64_t n_domains = 2;
    std::int64_t height = 32;
    std::int64_t width = 32;
    std::int64_t ls_channels = 16;
    double negative_slope = 0.2;
    double cbin_epsilon = 1e-5;

    /// Channel count of encoder level i (i in [0, kDepth)).
    [[nodiscard]] std::int64_t level_channels(int level) const { return base_width << level; }
    [[nodiscard]] std::int64_t bottleneck_channels() const { return base_width << kDepth; }

    friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

void validate(const ArchConfig& cfg);

using NamedTensor = std::pair<std::string, torch::Tensor>;
using NamedTensors = std::vector<NamedTensor>;

/// Bottleneck features plus one skip per encoder level (highest resolution first).
struct ContentRepresentation {
    torch::Tensor z_c;
    std::vector<torch::Tensor> skips;
};

/// Parameters of the one-dimensional domain posterior, one entry per image.
struct DomainLatent {
    torch::Tensor mu;
    torch::Tensor log_var;
};

/// Throws ShapeError unless x is [N,1,H,W] with H and W divisible by 16.
void check_image_batch(const torch::Tensor& x);

/// Batched one-hot domain codes, shape [N, n_domains].
torch::Tensor make_domain_codes(const std::vector<std::int64_t>& domain_indices, std::int64_t n_domains,
                                torch::Dtype dtype = torch::kFloat32);

/// Throws InvalidArgument unless `code` is [N, n_domains] with exactly one 1 per row.
void check_domain_codes(const torch::Tensor& code, std::int64_t n_domains);

}  // namespace acs::models
