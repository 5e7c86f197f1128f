#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acs/harness/ablation.hpp"
#include "acs/harness/forgetting.hpp"
#include "acs/harness/records.hpp"

namespace acs::harness {

inline constexpr int kSummaryFormatVersion = 1;
/// Rank orderings are only reported when every compared run has this many seeds.
inline constexpr int kMinRankingSeeds = 5;

/// Seed mean of one (method, schedule, epoch) row, per dataset plus the
/// average column (mean of the dataset cells).
struct TableRow {
    std::string label;
    std::vector<std::string> methods;  ///< several when identical baselines are merged
    std::vector<std::string> datasets;
    std::vector<MeanStd> iou;
    std::vector<MeanStd> dice;
    double average_iou = 0;
    double average_dice = 0;
};

struct TableBlock {
    std::string schedule;
    int epoch = 0;
    std::vector<TableRow> rows;
};

/// Rows for every method of `schedule` evaluated at `epoch`. With
/// merge_identical, methods whose seed-level records are equal at that epoch
/// collapse into one "Baselines (...)" row.
TableBlock table_block(const std::vector<MetricsRecord>& records, const std::string& schedule, int epoch,
                       bool merge_identical);

/// Mean ± std over (schedule, dataset) cells of the seed-mean difference
/// `method − other` at the given epoch selector ("switch" or "final").
struct Delta {
    std::string method;
    std::string versus;
    std::string epoch;  ///< "switch" or "final"
    MeanStd dice;
    MeanStd iou;
};
std::vector<Delta> compute_deltas(const std::vector<MetricsRecord>& records, const std::string& method);

nlohmann::json summary_json(const std::vector<MetricsRecord>& records, const std::optional<ForgettingReport>& forgetting,
                            const std::optional<AblationTable>& ablation);
std::string tables_markdown(const std::vector<MetricsRecord>& records, const std::optional<AblationTable>& ablation);
/// Dice vs epoch per dataset (seed mean) with the stage switch marked.
std::string learning_curve_svg(const std::vector<MetricsRecord>& records, const std::string& schedule,
                               const std::string& method);

/// Writes metrics.csv, summary.json, tables.md and plots/<schedule>_<method>.svg.
/// Forgetting and ablation tables are derived from the records when possible.
void emit_report(std::vector<MetricsRecord> records, const std::filesystem::path& out_dir);

/// Collects every records.csv below `dir` (sorted by path).
std::vector<MetricsRecord> collect_records(const std::filesystem::path& dir);

}  // namespace acs::harness
