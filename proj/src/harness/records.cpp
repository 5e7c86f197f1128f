#include "acs/harness/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "acs/errors.hpp"
#include "acs/training/common.hpp"

namespace acs::harness {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

auto key(const MetricsRecord& r) { return std::tie(r.method, r.schedule, r.seed, r.epoch, r.stage, r.dataset); }

}  // namespace

std::string records_to_csv(const std::vector<MetricsRecord>& records) {
    std::ostringstream out;
    out << kMetricsHeader << '\n';
    for (const auto& r : records) {
        out << r.method << ',' << r.schedule << ',' << r.seed << ',' << r.stage << ',' << r.epoch << ',' << r.dataset
            << ',' << training::format_number(r.iou) << ',' << training::format_number(r.dice) << '\n';
    }
    return out.str();
}

std::vector<MetricsRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw IoError("metrics file does not start with the header '" + std::string(kMetricsHeader) + "'");
    }
    std::vector<MetricsRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw IoError("metrics line " + std::to_string(line_no) + " has " +
                                         std::to_string(f.size()) + " fields, expected 8");
        try {
            MetricsRecord r;
            r.method = f[0];
            r.schedule = f[1];
            r.seed = std::stoull(f[2]);
            r.stage = std::stoi(f[3]);
            r.epoch = std::stoi(f[4]);
            r.dataset = f[5];
            r.iou = std::stod(f[6]);
            r.dice = std::stod(f[7]);
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw IoError("metrics line " + std::to_string(line_no) + " has a malformed number");
        }
    }
    return out;
}

void write_records(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << records_to_csv(records);
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MetricsRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return records_from_csv(buf.str());
}

void validate_records(const std::vector<MetricsRecord>& records) {
    std::set<std::tuple<std::string, std::string, std::uint64_t, int, int, std::string>> seen;
    for (const auto& r : records) {
        if (!(r.iou >= 0 && r.iou <= 1 && r.dice >= 0 && r.dice <= 1)) {
            throw InvalidArgument("metric outside [0,1] for " + r.method + "/" + r.schedule + "/" + r.dataset);
        }
        if (!seen.emplace(r.method, r.schedule, r.seed, r.stage, r.epoch, r.dataset).second) {
            throw InvalidArgument("duplicate record for " + r.method + "/" + r.schedule + " seed " +
                                  std::to_string(r.seed) + " epoch " + std::to_string(r.epoch) + " dataset " +
                                  r.dataset);
        }
    }
}

void sort_records(std::vector<MetricsRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const MetricsRecord& a, const MetricsRecord& b) { return key(a) < key(b); });
}

}  // namespace acs::harness
