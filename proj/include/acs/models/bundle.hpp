#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "acs/models/architecture.hpp"
#include "acs/models/checkpoint.hpp"
#include "acs/models/components.hpp"

namespace acs::models {

enum class Collection { ContentEncoder, DomainEncoder, LatentScale, Generator, DomainDiscriminator, ContentDiscriminator, Segmenter };

inline constexpr std::array<Collection, 7> kAllCollections = {
    Collection::ContentEncoder,      Collection::DomainEncoder,        Collection::LatentScale,
    Collection::Generator,           Collection::DomainDiscriminator,  Collection::ContentDiscriminator,
    Collection::Segmenter};

/// Short prefix used in parameter names ("E_c", "E_d", "LS", "G", "D_d", "D_c", "S").
std::string_view collection_name(Collection c);
Collection collection_from_name(std::string_view name);
bool is_discriminator(Collection c);


/// The seven ACS components with per-collection trainable flags.
class ModelBundle {
public:
    explicit ModelBundle(const ArchConfig& cfg);

    ModelBundle(const ModelBundle&) = delete;
    ModelBundle& operator=(const ModelBundle&) = delete;
    ModelBundle(ModelBundle&&) = default;
    ModelBundle& operator=(ModelBundle&&) = default;

    [[nodiscard]] const ArchConfig& config() const { return cfg_; }

    torch::nn::Module& module(Collection c);

    /// Every parameter, prefixed by its collection, in a stable order.
    NamedTensors named_parameters();
    NamedTensors collection_parameters(Collection c);

    [[nodiscard]] bool trainable(Collection c) const { return trainable_.at(c); }
    void set_trainable(Collection c, bool value) { trainable_[c] = value; }

    /// Names of S's convolutions in registry order, e.g. "S.up3".
    [[nodiscard]] std::vector<std::string> segmenter_layer_names() const;
    /// The last kFinetuneLayers entries of segmenter_layer_names().
    [[nodiscard]] std::vector<std::string> finetune_layer_names() const;
    /// Weight and bias names of the fine-tune layers.
    [[nodiscard]] std::vector<std::string> finetune_parameter_names() const;

    [[nodiscard]] nlohmann::json manifest();

    void to(torch::Dtype dtype);
    /// Copies every parameter value from `other` (same architecture).
    void copy_from(ModelBundle& other);
    /// Independent deep copy, including trainable flags.
    ModelBundle clone();

    /// Highest training stage completed on this bundle (0 = untrained).
    int completed_stage = 0;

    ContentEncoder content_encoder{nullptr};
    DomainEncoder domain_encoder{nullptr};
    LatentScale latent_scale{nullptr};
    Generator generator{nullptr};
    DomainDiscriminator domain_discriminator{nullptr};
    ContentDiscriminator content_discriminator{nullptr};
    Segmenter segmenter{nullptr};

private:
    ArchConfig cfg_;
    std::map<Collection, bool> trainable_;
};

/// Checkpoint archive: manifest.json (architecture, layer registry, freeze
/// flags) plus one raw f32 blob per parameter.
void save_bundle(ModelBundle& bundle, const std::filesystem::path& path);
/// Rebuilds the bundle from the manifest's architecture and validates every shape.
ModelBundle load_bundle(const std::filesystem::path& path);

nlohmann::json to_json(const ArchConfig& cfg);
ArchConfig arch_from_json(const nlohmann::json& j);

}  // namespace acs::models
