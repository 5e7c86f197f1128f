#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <torch/torch.h>

#include "acs/models/architecture.hpp"
#include "acs/training/config.hpp"

namespace acs::training {

/// Named Adam optimisers, the global step counter and the noise generator of
/// one training run.
class OptimState {
public:
    OptimState(OptimConfig cfg, std::uint64_t seed);

    /// Registers (or replaces) an optimiser over `params`.
    void add_group(const std::string& name, const models::NamedTensors& params);
    [[nodiscard]] bool has_group(const std::string& name) const { return optimizers_.count(name) != 0; }
    torch::optim::Adam& group(const std::string& name);
    /// Parameter names held by a group.
    [[nodiscard]] const std::vector<std::string>& group_names(const std::string& name) const;

    torch::Generator& rng() { return rng_; }
    void reseed(std::uint64_t seed);

    [[nodiscard]] std::int64_t step() const { return step_; }
    void advance() { ++step_; }
    /// Continues the step count of another run (branching from a shared snapshot).
    void set_step(std::int64_t step) { step_ = step; }

    [[nodiscard]] const OptimConfig& config() const { return cfg_; }

    void save(const std::filesystem::path& path);
    /// Groups must already be registered with matching parameters.
    void load(const std::filesystem::path& path);
    /// Serialised bytes (used for bit-exact comparisons).
    std::string serialize();

private:
    OptimConfig cfg_;
    std::map<std::string, std::unique_ptr<torch::optim::Adam>> optimizers_;
    std::map<std::string, std::vector<std::string>> names_;
    torch::Generator rng_;
    std::int64_t step_ = 0;
};

}  // namespace acs::training
