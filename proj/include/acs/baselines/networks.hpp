#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>
#include <torch/torch.h>

#include "acs/models/architecture.hpp"
#include "acs/models/components.hpp"

namespace acs::baselines {

/// A single-path segmentation network: image batch in, per-pixel logits out.
class SegmentationNet {
public:
    virtual ~SegmentationNet() = default;

    virtual torch::Tensor logits(const torch::Tensor& images) = 0;
    virtual models::NamedTensors named_parameters() = 0;
    /// "unet" or "unet-b".
    [[nodiscard]] virtual std::string kind() const = 0;
    [[nodiscard]] virtual const models::ArchConfig& config() const = 0;
    /// Deep copy; does not touch the global RNG.
    [[nodiscard]] virtual std::unique_ptr<SegmentationNet> clone() = 0;

    torch::Tensor probabilities(const torch::Tensor& images) { return torch::sigmoid(logits(images)); }
    [[nodiscard]] std::int64_t parameter_count();
    nlohmann::json manifest();
    void copy_from(SegmentationNet& other);
    void set_requires_grad(bool on);
};

/// Classic U-Net: two 3x3 convolutions per level, max-pool down, bilinear up.
class PlainUNetImpl : public torch::nn::Module {
public:
    explicit PlainUNetImpl(const models::ArchConfig& cfg);
    torch::Tensor forward(const torch::Tensor& x);

    std::vector<torch::nn::Sequential> encoders;
    torch::nn::Sequential bottleneck{nullptr};
    std::vector<torch::nn::Sequential> decoders;
    torch::nn::Conv2d head{nullptr};
};
TORCH_MODULE(PlainUNet);

class UNetNet : public SegmentationNet {
public:
    explicit UNetNet(const models::ArchConfig& cfg);
    torch::Tensor logits(const torch::Tensor& images) override;
    models::NamedTensors named_parameters() override;
    [[nodiscard]] std::string kind() const override { return "unet"; }
    [[nodiscard]] const models::ArchConfig& config() const override { return cfg_; }
    [[nodiscard]] std::unique_ptr<SegmentationNet> clone() override;

    PlainUNet net;

private:
    models::ArchConfig cfg_;
};

/// E_c followed by S, with the parameter names of the ACS manifest.
class UNetBNet : public SegmentationNet {
public:
    explicit UNetBNet(const models::ArchConfig& cfg);
    torch::Tensor logits(const torch::Tensor& images) override;
    models::NamedTensors named_parameters() override;
    [[nodiscard]] std::string kind() const override { return "unet-b"; }
    [[nodiscard]] const models::ArchConfig& config() const override { return cfg_; }
    [[nodiscard]] std::unique_ptr<SegmentationNet> clone() override;

    models::ContentEncoder content_encoder;
    models::Segmenter segmenter;

private:
    models::ArchConfig cfg_;
};

/// Builds "unet" or "unet-b" after seeding the global RNG.
std::unique_ptr<SegmentationNet> make_segmentation_net(const std::string& kind, const models::ArchConfig& cfg,
                                                       std::uint64_t seed);

void save_net(SegmentationNet& net, const std::filesystem::path& path);
std::unique_ptr<SegmentationNet> load_net(const std::filesystem::path& path);

}  // namespace acs::baselines
