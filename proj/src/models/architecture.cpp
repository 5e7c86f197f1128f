#include "acs/models/architecture.hpp"

#include "acs/errors.hpp"

namespace acs::models {

void validate(const ArchConfig& cfg) {
    if (cfg.base_width < 1) throw ConfigError("arch.base_width must be >= 1");
    if (cfg.n_domains < 1) throw ConfigError("arch.n_domains must be >= 1");
    if (cfg.ls_channels < 1) throw ConfigError("arch.ls_channels must be >= 1");
    if (cfg.height % kSpatialDivisor != 0 || cfg.height < kSpatialDivisor) {
        throw ConfigError("arch height " + std::to_string(cfg.height) + " is not a positive multiple of 16");
    }
    if (cfg.width % kSpatialDivisor != 0 || cfg.width < kSpatialDivisor) {
        throw ConfigError("arch width " + std::to_string(cfg.width) + " is not a positive multiple of 16");
    }
    if (!(cfg.cbin_epsilon > 0.0)) throw ConfigError("arch.cbin_epsilon must be > 0");
}

void check_image_batch(const torch::Tensor& x) {
    if (x.dim() != 4 || x.size(1) != 1) {
        throw ShapeError("image batch must have shape [N, 1, H, W], got " + std::to_string(x.dim()) + " dims");
    }
    if (x.size(2) % kSpatialDivisor != 0 || x.size(2) == 0) {
        throw ShapeError("image height " + std::to_string(x.size(2)) + " is not divisible by 16");
    }
    if (x.size(3) % kSpatialDivisor != 0 || x.size(3) == 0) {
        throw ShapeError("image width " + std::to_string(x.size(3)) + " is not divisible by 16");
    }
}

torch::Tensor make_domain_codes(const std::vector<std::int64_t>& domain_indices, std::int64_t n_domains,
                                torch::Dtype dtype) {
    auto codes = torch::zeros({static_cast<std::int64_t>(domain_indices.size()), n_domains},
                              torch::TensorOptions().dtype(dtype));
    for (std::size_t i = 0; i < domain_indices.size(); ++i) {
        const auto d = domain_indices[i];
        if (d < 0 || d >= n_domains) {
            throw InvalidArgument("domain index " + std::to_string(d) + " outside [0, " + std::to_string(n_domains) +
                                  ")");
        }
        codes[static_cast<std::int64_t>(i)][d] = 1;
    }
    return codes;
}

void check_domain_codes(const torch::Tensor& code, std::int64_t n_domains) {
    if (code.dim() != 2 || code.size(1) != n_domains) {
        throw InvalidArgument("domain code must have shape [N, " + std::to_string(n_domains) + "]");
    }
    const auto c = code.detach().to(torch::kDouble);
    const bool binary = ((c == 0) | (c == 1)).all().item<bool>();
    const bool one_hot = (c.sum(1) == 1).all().item<bool>();
    if (!binary || !one_hot) throw InvalidArgument("domain code rows must be one-hot");
}

}  // namespace acs::models
