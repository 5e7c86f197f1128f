#include "acs/models/components.hpp"

#include "acs/errors.hpp"

namespace acs::models {
namespace {

namespace F = torch::nn::functional;

torch::nn::Conv2d conv3x3(std::int64_t in, std::int64_t out, std::int64_t stride = 1) {
    return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1));
}

torch::nn::Conv2d conv1x1(std::int64_t in, std::int64_t out) {
    return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 1));
}

torch::Tensor act(const torch::Tensor& x, double slope) {
    return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(slope));
}

torch::Tensor instance_normalize(const torch::Tensor& x, double epsilon) {
    const auto mean = x.mean({2, 3}, /*keepdim=*/true);
    const auto centered = x - mean;
    const auto var = (centered * centered).mean({2, 3}, /*keepdim=*/true);
    return centered / torch::sqrt(var + epsilon);
}

}  // namespace

torch::Tensor upsample2x(const torch::Tensor& x) {
    return F::interpolate(x, F::InterpolateFuncOptions()
                                 .scale_factor(std::vector<double>{2.0, 2.0})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
}

// --- CBIN -------------------------------------------------------------------

CbinImpl::CbinImpl(std::int64_t channels, std::int64_t n_domains, double epsilon)
    : n_domains_(n_domains), epsilon_(epsilon) {
    code_to_bias = register_module("code_to_bias", torch::nn::Linear(torch::nn::LinearOptions(n_domains, channels).bias(false)));
}

torch::Tensor CbinImpl::bias(const torch::Tensor& code) {
    if (code.dim() != 2 || code.size(1) != n_domains_) {
        throw InvalidArgument("domain code length " + std::to_string(code.dim() == 2 ? code.size(1) : -1) +
                              " does not match " + std::to_string(n_domains_) + " domains");
    }
    auto b = torch::tanh(code_to_bias->forward(code));
    return b.view({b.size(0), b.size(1), 1, 1});
}

torch::Tensor CbinImpl::forward(const torch::Tensor& features, const torch::Tensor& code) {
    return instance_normalize(features, epsilon_) + bias(code);
}

torch::Tensor cbin(const torch::Tensor& features, const torch::Tensor& code, const torch::Tensor& weight,
                   double epsilon) {
    if (code.dim() != 2 || code.size(1) != weight.size(1)) {
        throw InvalidArgument("domain code length does not match the bias weight");
    }
    auto b = torch::tanh(torch::matmul(code, weight.t()));
    return instance_normalize(features, epsilon) + b.view({b.size(0), b.size(1), 1, 1});
}

// --- E_c ---------------------------------------------------------------------

ContentEncoderImpl::ContentEncoderImpl(const ArchConfig& cfg) : slope_(cfg.negative_slope) {
    std::int64_t in = 1;
    for (int level = 0; level < kDepth; ++level) {
        const auto c = cfg.level_channels(level);
        down.push_back(register_module("level" + std::to_string(level) + "_down", conv3x3(in, c, 2)));
        refine.push_back(register_module("level" + std::to_string(level) + "_conv", conv3x3(c, c)));
        in = c;
    }
    bottleneck = register_module("bottleneck", conv3x3(in, cfg.bottleneck_channels()));
}

ContentRepresentation ContentEncoderImpl::forward(const torch::Tensor& x) {
    ContentRepresentation rep;
    auto h = x;
    for (int level = 0; level < kDepth; ++level) {
        h = act(down[level]->forward(h), slope_);
        h = act(refine[level]->forward(h), slope_);
        rep.skips.push_back(h);
    }
    rep.z_c = act(bottleneck->forward(h), slope_);
    return rep;
}

// --- E_d ---------------------------------------------------------------------

DomainEncoderImpl::DomainEncoderImpl(const ArchConfig& cfg) : slope_(cfg.negative_slope) {
    std::int64_t in = 1;
    for (int i = 0; i < 3; ++i) {
        const auto c = cfg.level_channels(i);
        convs.push_back(register_module("conv" + std::to_string(i), conv3x3(in, c, 2)));
        in = c;
    }
    mu_head = register_module("mu_head", torch::nn::Linear(in, 1));
    log_var_head = register_module("log_var_head", torch::nn::Linear(in, 1));
}

DomainLatent DomainEncoderImpl::forward(const torch::Tensor& x) {
    auto h = x;
    for (auto& conv : convs) h = act(conv->forward(h), slope_);
    h = h.mean({2, 3});
    return {mu_head->forward(h).squeeze(1), log_var_head->forward(h).squeeze(1)};
}

// --- LS ----------------------------------------------------------------------

LatentScaleImpl::LatentScaleImpl(const ArchConfig& cfg) {
    scale = register_parameter("scale", torch::randn({cfg.ls_channels}));
    shift = register_parameter("shift", torch::zeros({cfg.ls_channels}));
}

torch::Tensor LatentScaleImpl::forward(const torch::Tensor& z, std::int64_t height, std::int64_t width) {
    if (z.dim() != 1) throw ShapeError("latent scale expects z of shape [N]");
    const auto n = z.size(0);
    const auto c = scale.size(0);
    auto f = z.view({n, 1, 1, 1}) * scale.view({1, c, 1, 1}) + shift.view({1, c, 1, 1});
    return f.expand({n, c, height, width});
}

// --- G -----------------------------------------------------------------------

GeneratorImpl::GeneratorImpl(const ArchConfig& cfg) : slope_(cfg.negative_slope) {
    std::int64_t in = cfg.bottleneck_channels() + cfg.ls_channels;
    for (int level = kDepth - 1; level >= 0; --level) {
        const auto c = cfg.level_channels(level);
        convs.push_back(register_module("conv" + std::to_string(level), conv3x3(in, c)));
        norms.push_back(register_module("cbin" + std::to_string(level), Cbin(c, cfg.n_domains, cfg.cbin_epsilon)));
        in = c;
    }
    convs.push_back(register_module("conv_full", conv3x3(in, in)));
    norms.push_back(register_module("cbin_full", Cbin(in, cfg.n_domains, cfg.cbin_epsilon)));
    to_image = register_module("to_image", conv1x1(in, 1));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& z_c, const torch::Tensor& f_ds, const torch::Tensor& code) {
    if (z_c.size(2) != f_ds.size(2) || z_c.size(3) != f_ds.size(3) || z_c.size(0) != f_ds.size(0)) {
        throw ShapeError("z_c and f_ds must share batch and spatial dimensions");
    }
    auto h = torch::cat({z_c, f_ds}, 1);
    for (std::size_t i = 0; i < convs.size(); ++i) {
        if (i > 0) h = upsample2x(h);
        h = act(norms[i]->forward(convs[i]->forward(h), code), slope_);
    }
    return torch::sigmoid(to_image->forward(h));
}

// --- D_d ---------------------------------------------------------------------

DomainDiscriminatorImpl::DomainDiscriminatorImpl(const ArchConfig& cfg) : slope_(cfg.negative_slope) {
    std::int64_t in = 1 + cfg.n_domains;
    for (int i = 0; i < 3; ++i) {
        const auto c = cfg.level_channels(i);
        convs.push_back(register_module("conv" + std::to_string(i), conv3x3(in, c, 2)));
        in = c;
    }
    classifier = register_module("classifier", torch::nn::Linear(in, 1));
}

torch::Tensor DomainDiscriminatorImpl::forward(const torch::Tensor& x, const torch::Tensor& code) {
    const auto planes = code.view({code.size(0), code.size(1), 1, 1}).expand({x.size(0), code.size(1), x.size(2), x.size(3)});
    auto h = torch::cat({x, planes}, 1);
    for (auto& conv : convs) h = act(conv->forward(h), slope_);
    return classifier->forward(h.mean({2, 3})).squeeze(1);
}

// --- D_c ---------------------------------------------------------------------

ContentDiscriminatorImpl::ContentDiscriminatorImpl(const ArchConfig& cfg)
    : slope_(cfg.negative_slope), epsilon_(cfg.cbin_epsilon) {
    // level i consumes skip i (concatenated with the running features) and halves resolution.
    std::int64_t running = 0;
    for (int level = 0; level < kDepth - 1; ++level) {
        const auto in = running + cfg.level_channels(level);
        const auto out = cfg.level_channels(level + 1);
        convs.push_back(register_module("level" + std::to_string(level), conv3x3(in, out, 2)));
        running = out;
    }
    const auto deepest_in = running + cfg.level_channels(kDepth - 1) + cfg.bottleneck_channels();
    convs.push_back(register_module("level" + std::to_string(kDepth - 1), conv3x3(deepest_in, running)));
    classifier = register_module("classifier", torch::nn::Linear(running, cfg.n_domains + 1));
}

torch::Tensor ContentDiscriminatorImpl::forward(const ContentRepresentation& rep) {
    if (rep.skips.size() != static_cast<std::size_t>(kDepth)) {
        throw ShapeError("content discriminator needs " + std::to_string(kDepth) + " skips, got " +
                         std::to_string(rep.skips.size()));
    }
    torch::Tensor h;
    for (int level = 0; level < kDepth - 1; ++level) {
        const auto in = level == 0 ? rep.skips[0] : torch::cat({h, rep.skips[level]}, 1);
        h = act(instance_normalize(convs[level]->forward(in), epsilon_), slope_);
    }
    h = act(instance_normalize(convs[kDepth - 1]->forward(torch::cat({h, rep.skips[kDepth - 1], rep.z_c}, 1)),
                               epsilon_),
            slope_);
    return classifier->forward(h.mean({2, 3}));
}

// --- S -----------------------------------------------------------------------

SegmenterImpl::SegmenterImpl(const ArchConfig& cfg)
    : layer_names_{"up3", "up2", "up1", "up0", "full", "head"}, slope_(cfg.negative_slope) {
    const auto c0 = cfg.level_channels(0);
    const auto c1 = cfg.level_channels(1);
    const auto c2 = cfg.level_channels(2);
    const auto c3 = cfg.level_channels(3);
    up3 = register_module("up3", conv3x3(cfg.bottleneck_channels() + c3, c3));
    up2 = register_module("up2", conv3x3(c3 + c2, c2));
    up1 = register_module("up1", conv3x3(c2 + c1, c1));
    up0 = register_module("up0", conv3x3(c1 + c0, c0));
    full = register_module("full", conv3x3(c0, c0));
    head = register_module("head", conv1x1(c0, 1));
}

std::vector<torch::nn::Conv2d> SegmenterImpl::layers() const { return {up3, up2, up1, up0, full, head}; }

torch::Tensor SegmenterImpl::forward(const ContentRepresentation& rep) {
    if (rep.skips.size() != static_cast<std::size_t>(kDepth)) {
        throw ShapeError("segmenter needs " + std::to_string(kDepth) + " skips, got " +
                         std::to_string(rep.skips.size()));
    }
    auto h = act(up3->forward(torch::cat({rep.z_c, rep.skips[3]}, 1)), slope_);
    h = act(up2->forward(torch::cat({upsample2x(h), rep.skips[2]}, 1)), slope_);
    h = act(up1->forward(torch::cat({upsample2x(h), rep.skips[1]}, 1)), slope_);
    h = act(up0->forward(torch::cat({upsample2x(h), rep.skips[0]}, 1)), slope_);
    h = act(full->forward(upsample2x(h)), slope_);
    return head->forward(h);
}

}  // namespace acs::models
