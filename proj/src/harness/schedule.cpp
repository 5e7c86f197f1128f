#include "acs/harness/schedule.hpp"

#include <set>

#include "acs/errors.hpp"

namespace acs::harness {
namespace {

std::vector<std::string> letters(const std::string& s, const std::string& schedule) {
    std::vector<std::string> out;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c))) {
            throw InvalidArgument("schedule '" + schedule + "' contains an invalid dataset name character");
        }
        out.emplace_back(1, c);
    }
    return out;
}

}  // namespace

ScheduleSpec schedule_from_name(const std::string& name, int epochs_per_stage) {
    if (epochs_per_stage < 1) throw InvalidArgument("epochs_per_stage must be >= 1");
    const auto dash = name.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= name.size()) {
        throw InvalidArgument("schedule '" + name + "' is not of the form <stage1>-<stage2> or <datasets>-joint");
    }
    ScheduleSpec spec;
    spec.name = name;
    spec.epochs_per_stage = epochs_per_stage;
    spec.stage1_datasets = letters(name.substr(0, dash), name);
    const auto rest = name.substr(dash + 1);
    if (rest != "joint") spec.stage2_datasets = letters(rest, name);
    validate(spec);
    return spec;
}

void validate(const ScheduleSpec& spec) {
    if (spec.stage1_datasets.empty()) throw InvalidArgument("schedule '" + spec.name + "' has no stage-1 datasets");
    if (spec.epochs_per_stage < 1) throw InvalidArgument("epochs_per_stage must be >= 1");
    std::set<std::string> seen;
    for (const auto& n : spec.stage1_datasets) {
        if (!seen.insert(n).second) throw InvalidArgument("schedule '" + spec.name + "' repeats dataset " + n);
    }
    for (const auto& n : spec.stage2_datasets) {
        if (!seen.insert(n).second) {
            throw InvalidArgument("schedule '" + spec.name + "' uses dataset " + n + " in both stages");
        }
    }
}

void validate(const ScheduleSpec& spec, const training::DataPool& pool) {
    validate(spec);
    for (const auto* list : {&spec.stage1_datasets, &spec.stage2_datasets}) {
        for (const auto& n : *list) {
            if (!pool.contains(n)) throw InvalidArgument("schedule '" + spec.name + "' names unknown dataset " + n);
        }
    }
}

std::vector<std::string> old_datasets(const ScheduleSpec& spec) {
    return spec.joint() ? std::vector<std::string>{} : spec.stage1_datasets;
}

baselines::StageDatasets to_stage_datasets(const ScheduleSpec& spec) {
    baselines::StageDatasets out;
    out.stage1 = spec.stage1_datasets;
    out.stage2 = spec.stage2_datasets;
    out.epochs_stage1 = spec.switch_epoch();
    out.epochs_stage2 = spec.joint() ? 0 : spec.epochs_per_stage;
    return out;
}

std::vector<std::string> continual_schedule_names() { return {"AB-C", "AC-B", "BC-A"}; }

}  // namespace acs::harness
