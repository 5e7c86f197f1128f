#pragma once

#include <string>
#include <vector>

#include "acs/baselines/train.hpp"
#include "acs/training/data_pool.hpp"

namespace acs::harness {

/// Which datasets train in which stage. Joint schedules have no stage 2 and
/// run a single stage of 2 * epochs_per_stage epochs.
struct ScheduleSpec {
    std::string name;
    std::vector<std::string> stage1_datasets;
    std::vector<std::string> stage2_datasets;
    int epochs_per_stage = 30;

    [[nodiscard]] bool joint() const { return stage2_datasets.empty(); }
    [[nodiscard]] int total_epochs() const { return 2 * epochs_per_stage; }
    /// Epoch that closes stage 1 (the full run for joint schedules).
    [[nodiscard]] int switch_epoch() const { return joint() ? total_epochs() : epochs_per_stage; }

    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// "AB-C", "AC-B", "BC-A" and "ABC-joint" over single-letter dataset names.
/// Any "<names>-<names>" string of dataset letters is accepted as a custom
/// schedule, and "<names>-joint" as a custom joint schedule.
ScheduleSpec schedule_from_name(const std::string& name, int epochs_per_stage = 30);

/// Stage sets must be non-empty (stage 1) and disjoint, with no duplicates.
void validate(const ScheduleSpec& spec);
/// Also checks that every dataset exists in the pool.
void validate(const ScheduleSpec& spec, const training::DataPool& pool);

/// Datasets trained on before the switch (the "old" datasets), empty for joint.
std::vector<std::string> old_datasets(const ScheduleSpec& spec);

baselines::StageDatasets to_stage_datasets(const ScheduleSpec& spec);

/// The three continual schedules of the experiment matrix.
std::vector<std::string> continual_schedule_names();

}  // namespace acs::harness
