#pragma once

#include <string>
#include <vector>

#include <torch/torch.h>

#include "acs/models/architecture.hpp"

namespace acs::models {

/// Instance normalization followed by a tanh-bounded bias computed from the
/// one-hot domain code (central biasing instance normalization).
class CbinImpl : public torch::nn::Module {
public:
    CbinImpl(std::int64_t channels, std::int64_t n_domains, double epsilon);
    torch::Tensor forward(const torch::Tensor& features, const torch::Tensor& code);
    /// tanh(W code) as an [N, C, 1, 1] map.
    torch::Tensor bias(const torch::Tensor& code);

    torch::nn::Linear code_to_bias{nullptr};

private:
    std::int64_t n_domains_;
    double epsilon_;
};
TORCH_MODULE(Cbin);

/// Functional form used by tests: instance norm plus tanh(W code).
torch::Tensor cbin(const torch::Tensor& features, const torch::Tensor& code, const torch::Tensor& weight,
                   double epsilon = 1e-5);

class ContentEncoderImpl : public torch::nn::Module {
public:
    explicit ContentEncoderImpl(const ArchConfig& cfg);
    ContentRepresentation forward(const torch::Tensor& x);

    std::vector<torch::nn::Conv2d> down;
    std::vector<torch::nn::Conv2d> refine;
    torch::nn::Conv2d bottleneck{nullptr};

private:
    double slope_;
};
TORCH_MODULE(ContentEncoder);

class DomainEncoderImpl : public torch::nn::Module {
public:
    explicit DomainEncoderImpl(const ArchConfig& cfg);
    DomainLatent forward(const torch::Tensor& x);

    std::vector<torch::nn::Conv2d> convs;
    torch::nn::Linear mu_head{nullptr};
    torch::nn::Linear log_var_head{nullptr};

private:
    double slope_;
};
TORCH_MODULE(DomainEncoder);

/// Learned per-channel affine expansion of a scalar domain sample.
class LatentScaleImpl : public torch::nn::Module {
public:
    explicit LatentScaleImpl(const ArchConfig& cfg);
    /// z: [N]. Returns [N, ls_channels, height, width].
    torch::Tensor forward(const torch::Tensor& z, std::int64_t height, std::int64_t width);

    torch::Tensor scale;
    torch::Tensor shift;
};
TORCH_MODULE(LatentScale);

class GeneratorImpl : public torch::nn::Module {
public:
    explicit GeneratorImpl(const ArchConfig& cfg);
    torch::Tensor forward(const torch::Tensor& z_c, const torch::Tensor& f_ds, const torch::Tensor& code);

    std::vector<torch::nn::Conv2d> convs;
    std::vector<Cbin> norms;
    torch::nn::Conv2d to_image{nullptr};

private:
    double slope_;
};
TORCH_MODULE(Generator);

/// Conditional realness discriminator; the code enters as broadcast channels.
class DomainDiscriminatorImpl : public torch::nn::Module {
public:
    explicit DomainDiscriminatorImpl(const ArchConfig& cfg);
    /// Realness logits, shape [N].
    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& code);

    std::vector<torch::nn::Conv2d> convs;
    torch::nn::Linear classifier{nullptr};

private:
    double slope_;
};
TORCH_MODULE(DomainDiscriminator);

/// Reversed decoder over the content representation: walks from the finest
/// skip down to z_c, then classifies into n_domains + 1 classes.
class ContentDiscriminatorImpl : public torch::nn::Module {
public:
    explicit ContentDiscriminatorImpl(const ArchConfig& cfg);
    torch::Tensor forward(const ContentRepresentation& rep);

    std::vector<torch::nn::Conv2d> convs;
    torch::nn::Linear classifier{nullptr};

private:
    double slope_;
    double epsilon_;
};
TORCH_MODULE(ContentDiscriminator);

/// U-Net decoder. Its convolutions are registered bottleneck-to-output.
class SegmenterImpl : public torch::nn::Module {
public:
    explicit SegmenterImpl(const ArchConfig& cfg);
    /// Foreground logits, shape [N, 1, H, W].
    torch::Tensor forward(const ContentRepresentation& rep);

    /// Layer names in registry order: up3, up2, up1, up0, full, head.
    [[nodiscard]] const std::vector<std::string>& layer_names() const { return layer_names_; }
    [[nodiscard]] std::vector<torch::nn::Conv2d> layers() const;

    torch::nn::Conv2d up3{nullptr}, up2{nullptr}, up1{nullptr}, up0{nullptr}, full{nullptr}, head{nullptr};

private:
    std::vector<std::string> layer_names_;
    double slope_;
};
TORCH_MODULE(Segmenter);

/// Number of trailing S layers fine-tuned on new domains.
inline constexpr int kFinetuneLayers = 4;

torch::Tensor upsample2x(const torch::Tensor& x);

}  // namespace acs::models
