#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace acs::harness {

/// Test-set IoU/Dice of one dataset at one evaluation epoch of one run.
struct MetricsRecord {
    std::string method;
    std::string schedule;
    std::uint64_t seed = 0;
    int stage = 1;
    int epoch = 0;
    std::string dataset;
    double iou = 0;
    double dice = 0;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline constexpr const char* kMetricsHeader = "method,schedule,seed,stage,epoch,dataset,iou,dice";

/// Header plus one row per record, numbers written round-trip exact.
std::string records_to_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> records_from_csv(const std::string& text);

void write_records(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_records(const std::filesystem::path& path);

/// Throws if a key (method, schedule, seed, stage, epoch, dataset) repeats or
/// a metric lies outside [0,1].
void validate_records(const std::vector<MetricsRecord>& records);

/// Canonical order: method, schedule, seed, epoch, stage, dataset.
void sort_records(std::vector<MetricsRecord>& records);

}  // namespace acs::harness
