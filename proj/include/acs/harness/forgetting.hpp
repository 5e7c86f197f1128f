#pragma once

#include <string>
#include <vector>

#include "acs/harness/records.hpp"

namespace acs::harness {

inline constexpr double kRelativeDropEpsilon = 1e-8;

struct MeanStd {
    double mean = 0;
    double std = 0;  ///< population standard deviation
    int n = 0;

    friend bool operator==(const MeanStd&, const MeanStd&) = default;
};

MeanStd mean_std(const std::vector<double>& values);

/// Drop of one dataset in one seeded run.
struct ForgettingEntry {
    std::string method;
    std::string schedule;
    std::uint64_t seed = 0;
    std::string dataset;  ///< a dataset name, or "old-average"
    double dice_at_switch = 0;
    double dice_final = 0;
    double absolute_drop = 0;
    double relative_drop = 0;
};

/// ForgettingEntry values aggregated over seeds.
struct ForgettingRow {
    std::string method;
    std::string schedule;
    std::string dataset;
    MeanStd dice_at_switch;
    MeanStd dice_final;
    MeanStd absolute_drop;
    MeanStd relative_drop;
};

struct ForgettingReport {
    std::vector<ForgettingEntry> entries;
    /// One row per (method, schedule, dataset), plus an "old-average" row per
    /// (method, schedule) averaging the old datasets per seed first.
    std::vector<ForgettingRow> rows;

    /// Row lookup; throws if absent.
    [[nodiscard]] const ForgettingRow& row(const std::string& method, const std::string& schedule,
                                           const std::string& dataset) const;
};

inline constexpr const char* kOldAverage = "old-average";

ForgettingEntry forgetting_entry(double dice_at_switch, double dice_final);

/// Continual schedules only: the switch epoch is the last stage-1 epoch and the
/// final epoch the last stage-2 epoch of each run. Old datasets come from the
/// schedule name. Throws if a run lacks either epoch for a dataset.
ForgettingReport compute_forgetting(const std::vector<MetricsRecord>& records);

}  // namespace acs::harness
