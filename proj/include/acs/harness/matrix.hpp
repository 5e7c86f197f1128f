#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "acs/harness/records.hpp"
#include "acs/training/config.hpp"

namespace acs::harness {

/// An experiment matrix. JSON form:
///   {"config": <path relative to the matrix file, or a flat config object>,
///    "schedules": [...], "methods": [...], "seeds": [...],
///    "epochs_per_stage": 30, "ablation": false}
/// Every key except "config" is optional.
struct MatrixSpec {
    training::TrainConfig config;
    std::vector<std::string> schedules = {"AB-C", "AC-B", "BC-A", "ABC-joint"};
    std::vector<std::string> methods = {"acs", "unet", "unet-b", "mas", "ol-kd"};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int epochs_per_stage = 30;
    bool ablation = false;
};

MatrixSpec matrix_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
MatrixSpec load_matrix(const std::filesystem::path& path);

/// Seeds 1..n.
std::vector<std::uint64_t> first_seeds(int n);

/// <out>/runs/<schedule>/<method>/seed<k>
std::filesystem::path run_directory(const std::filesystem::path& out, const std::string& schedule,
                                    const std::string& method, std::uint64_t seed);

/// Runs every (schedule, method, seed) cell whose run directory lacks a
/// records.csv, then the ablation cells when requested, and returns all
/// records found under <out>/runs. With config.shared_pretrain the unet, mas
/// and ol-kd cells of one (schedule, seed) branch from one stage-1 run.
std::vector<MetricsRecord> run_matrix(const MatrixSpec& matrix, const std::filesystem::path& out,
                                      bool verbose = false);

}  // namespace acs::harness
