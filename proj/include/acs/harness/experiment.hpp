#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acs/errors.hpp"
#include "acs/harness/records.hpp"
#include "acs/harness/schedule.hpp"
#include "acs/training/config.hpp"

namespace acs::harness {

class ExperimentError : public Error {
public:
    using Error::Error;
};

/// "acs", "unet", "unet-b", "mas", "ol-kd".
std::vector<std::string> all_methods();
void check_method(const std::string& method);

struct ExperimentOptions {
    /// When set: train_log.csv, eval_log.csv, records.csv and final.tar are
    /// written here, plus periodic checkpoints under checkpoints/.
    std::optional<std::filesystem::path> run_dir;
};

/// True for epoch 0, every `eval_every` epochs, the switch epoch and the last epoch.
bool is_eval_epoch(int epoch, int eval_every, const ScheduleSpec& spec);

/// Trains `method` on `spec` and evaluates the test split of every dataset
/// of the configuration at every evaluation epoch.
std::vector<MetricsRecord> run_experiment(const ScheduleSpec& spec, const std::string& method,
                                          const training::TrainConfig& cfg, std::uint64_t seed,
                                          const ExperimentOptions& options = {});

/// Runs the U-Net based baselines (unet, mas, ol-kd; any subset) of one
/// (schedule, seed) from a single shared stage-1 run, branching at the switch.
/// Records before the switch are therefore identical across the methods.
std::map<std::string, std::vector<MetricsRecord>> run_shared_baselines(
    const ScheduleSpec& spec, const std::vector<std::string>& methods, const training::TrainConfig& cfg,
    std::uint64_t seed, const std::function<ExperimentOptions(const std::string&)>& options = {});

}  // namespace acs::harness
