#include "acs/baselines/networks.hpp"

#include "acs/errors.hpp"
#include "acs/models/bundle.hpp"
#include "acs/models/checkpoint.hpp"
#include "acs/models/rng_guard.hpp"

namespace acs::baselines {
namespace {

namespace F = torch::nn::functional;

torch::nn::Sequential double_conv(std::int64_t in, std::int64_t out, double slope) {
    return torch::nn::Sequential(
        torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1)),
        torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(slope)),
        torch::nn::Conv2d(torch::nn::Conv2dOptions(out, out, 3).padding(1)),
        torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(slope)));
}

models::NamedTensors prefixed(torch::nn::Module& m, const std::string& prefix) {
    models::NamedTensors out;
    for (const auto& item : m.named_parameters(/*recurse=*/true)) out.emplace_back(prefix + item.key(), item.value());
    return out;
}

}  // namespace

std::int64_t SegmentationNet::parameter_count() {
    std::int64_t n = 0;
    for (const auto& [_, p] : named_parameters()) n += p.numel();
    return n;
}

nlohmann::json SegmentationNet::manifest() {
    return {{"format_version", models::kCheckpointFormatVersion},
            {"model", kind()},
            {"architecture", models::to_json(config())},
            {"layers", models::layer_list(named_parameters())}};
}

void SegmentationNet::copy_from(SegmentationNet& other) {
    if (other.kind() != kind() || !(other.config() == config())) {
        throw InvalidArgument("cannot copy parameters between different networks");
    }
    torch::NoGradGuard no_grad;
    auto mine = named_parameters();
    auto theirs = other.named_parameters();
    for (std::size_t i = 0; i < mine.size(); ++i) mine[i].second.copy_(theirs[i].second);
}

void SegmentationNet::set_requires_grad(bool on) {
    for (auto& [_, p] : named_parameters()) p.requires_grad_(on);
}

PlainUNetImpl::PlainUNetImpl(const models::ArchConfig& cfg) {
    std::int64_t in = 1;
    for (int level = 0; level < models::kDepth; ++level) {
        const auto c = cfg.level_channels(level);
        encoders.push_back(register_module("enc" + std::to_string(level), double_conv(in, c, cfg.negative_slope)));
        in = c;
    }
    bottleneck = register_module("bottleneck", double_conv(in, cfg.bottleneck_channels(), cfg.negative_slope));
    in = cfg.bottleneck_channels();
    for (int level = models::kDepth - 1; level >= 0; --level) {
        const auto c = cfg.level_channels(level);
        decoders.push_back(register_module("dec" + std::to_string(level), double_conv(in + c, c, cfg.negative_slope)));
        in = c;
    }
    head = register_module("head", torch::nn::Conv2d(torch::nn::Conv2dOptions(in, 1, 1)));
}

torch::Tensor PlainUNetImpl::forward(const torch::Tensor& x) {
    models::check_image_batch(x);
    std::vector<torch::Tensor> skips;
    auto h = x;
    for (auto& enc : encoders) {
        h = enc->forward(h);
        skips.push_back(h);
        h = F::max_pool2d(h, F::MaxPool2dFuncOptions(2));
    }
    h = bottleneck->forward(h);
    for (std::size_t i = 0; i < decoders.size(); ++i) {
        const auto& skip = skips[skips.size() - 1 - i];
        h = decoders[i]->forward(torch::cat({models::upsample2x(h), skip}, 1));
    }
    return head->forward(h);
}

UNetNet::UNetNet(const models::ArchConfig& cfg) : net(cfg), cfg_(cfg) { models::validate(cfg_); }

torch::Tensor UNetNet::logits(const torch::Tensor& images) { return net->forward(images); }

models::NamedTensors UNetNet::named_parameters() { return prefixed(*net, "unet."); }

std::unique_ptr<SegmentationNet> UNetNet::clone() {
    std::unique_ptr<SegmentationNet> copy;
    {
        models::GlobalRngGuard guard;
        copy = std::make_unique<UNetNet>(cfg_);
    }
    copy->copy_from(*this);
    return copy;
}

UNetBNet::UNetBNet(const models::ArchConfig& cfg) : content_encoder(cfg), segmenter(cfg), cfg_(cfg) {
    models::validate(cfg_);
}

torch::Tensor UNetBNet::logits(const torch::Tensor& images) {
    models::check_image_batch(images);
    return segmenter->forward(content_encoder->forward(images));
}

models::NamedTensors UNetBNet::named_parameters() {
    auto out = prefixed(*content_encoder, "E_c.");
    auto s = prefixed(*segmenter, "S.");
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::unique_ptr<SegmentationNet> UNetBNet::clone() {
    std::unique_ptr<SegmentationNet> copy;
    {
        models::GlobalRngGuard guard;
        copy = std::make_unique<UNetBNet>(cfg_);
    }
    copy->copy_from(*this);
    return copy;
}

std::unique_ptr<SegmentationNet> make_segmentation_net(const std::string& kind, const models::ArchConfig& cfg,
                                                       std::uint64_t seed) {
    torch::manual_seed(seed);
    if (kind == "unet") return std::make_unique<UNetNet>(cfg);
    if (kind == "unet-b") return std::make_unique<UNetBNet>(cfg);
    throw InvalidArgument("unknown segmentation network '" + kind + "'");
}

void save_net(SegmentationNet& net, const std::filesystem::path& path) {
    models::save_tensors(path, net.manifest(), net.named_parameters());
}

std::unique_ptr<SegmentationNet> load_net(const std::filesystem::path& path) {
    const auto entries = models::read_archive(path);
    const auto it = entries.find("manifest.json");
    if (it == entries.end()) throw models::CheckpointError("checkpoint has no manifest.json");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(it->second);
    } catch (const nlohmann::json::exception& e) {
        throw models::CheckpointError(std::string("manifest.json is invalid: ") + e.what());
    }
    const auto kind = manifest.value("model", std::string());
    if (kind != "unet" && kind != "unet-b") {
        throw models::CheckpointError("checkpoint holds model '" + kind + "', not a baseline network");
    }
    std::unique_ptr<SegmentationNet> net;
    {
        models::GlobalRngGuard guard;
        const auto cfg = models::arch_from_json(manifest.at("architecture"));
        if (kind == "unet") {
            net = std::make_unique<UNetNet>(cfg);
        } else {
            net = std::make_unique<UNetBNet>(cfg);
        }
    }
    auto params = net->named_parameters();
    models::load_tensors(path, params);
    return net;
}

}  // namespace acs::baselines
