#pragma once

#include <map>
#include <string>
#include <vector>

#include "acs/harness/experiment.hpp"
#include "acs/training/config.hpp"

namespace acs::harness {

/// The five loss combinations of the ablation, in table order.
std::vector<training::LossToggles> ablation_toggles();

/// "acs" for the all-on combination, otherwise "acs:<adv><vae><gan><lr>" with
/// 1/0 flags, e.g. "acs:0111".
std::string ablation_method(const training::LossToggles& toggles);
/// Inverse of ablation_method; returns false for names that are not ACS variants.
bool parse_ablation_method(const std::string& method, training::LossToggles& toggles);

struct AblationCell {
    double iou = 0;
    double dice = 0;
};

struct AblationRow {
    training::LossToggles toggles;
    std::string method;
    std::map<std::string, AblationCell> per_schedule;
    AblationCell average;
};

struct AblationTable {
    std::vector<std::string> schedules;
    std::vector<AblationRow> rows;
};

/// Final-epoch scores averaged over every test dataset and seed of each
/// schedule; the average column is the mean of the schedule columns.
/// Rows whose method is absent from `records` are skipped.
AblationTable ablation_table(const std::vector<MetricsRecord>& records, const std::vector<std::string>& schedules);

struct AblationResult {
    std::vector<MetricsRecord> records;
    AblationTable table;
};

/// Runs ACS with each loss combination on every schedule for one seed.
AblationResult run_ablation(const training::TrainConfig& cfg, std::uint64_t seed,
                            const std::vector<std::string>& schedules = continual_schedule_names(),
                            int epochs_per_stage = 30,
                            const std::function<ExperimentOptions(const std::string&, const std::string&)>& options = {});

}  // namespace acs::harness
