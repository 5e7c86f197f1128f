#include "acs/harness/ablation.hpp"

#include <set>

namespace acs::harness {

std::vector<training::LossToggles> ablation_toggles() {
    // adv_c, vae, gan, lr
    return {{false, true, true, true},
            {true, false, false, false},
            {true, true, false, true},
            {true, false, true, true},
            {true, true, true, true}};
}

std::string ablation_method(const training::LossToggles& t) {
    if (t.adv_c && t.vae && t.gan && t.lr) return "acs";
    std::string flags;
    for (bool b : {t.adv_c, t.vae, t.gan, t.lr}) flags += b ? '1' : '0';
    return "acs:" + flags;
}

bool parse_ablation_method(const std::string& method, training::LossToggles& toggles) {
    if (method == "acs") {
        toggles = {};
        return true;
    }
    if (method.size() != 8 || method.rfind("acs:", 0) != 0) return false;
    bool flags[4];
    for (int i = 0; i < 4; ++i) {
        const char c = method[4 + i];
        if (c != '0' && c != '1') return false;
        flags[i] = c == '1';
    }
    toggles = {flags[0], flags[1], flags[2], flags[3]};
    return true;
}

AblationTable ablation_table(const std::vector<MetricsRecord>& records, const std::vector<std::string>& schedules) {
    AblationTable table;
    table.schedules = schedules;
    for (const auto& toggles : ablation_toggles()) {
        AblationRow row;
        row.toggles = toggles;
        row.method = ablation_method(toggles);
        bool present = false;
        for (const auto& schedule : schedules) {
            int final_epoch = -1;
            for (const auto& r : records) {
                if (r.method == row.method && r.schedule == schedule) final_epoch = std::max(final_epoch, r.epoch);
            }
            if (final_epoch < 0) continue;
            present = true;
            // Mean over seeds per dataset, then over datasets.
            std::map<std::string, std::pair<AblationCell, int>> per_dataset;
            for (const auto& r : records) {
                if (r.method != row.method || r.schedule != schedule || r.epoch != final_epoch) continue;
                auto& [cell, n] = per_dataset[r.dataset];
                cell.iou += r.iou;
                cell.dice += r.dice;
                ++n;
            }
            AblationCell cell;
            for (const auto& [_, acc] : per_dataset) {
                cell.iou += acc.first.iou / acc.second;
                cell.dice += acc.first.dice / acc.second;
            }
            cell.iou /= static_cast<double>(per_dataset.size());
            cell.dice /= static_cast<double>(per_dataset.size());
            row.per_schedule[schedule] = cell;
        }
        if (!present) continue;
        for (const auto& [_, cell] : row.per_schedule) {
            row.average.iou += cell.iou;
            row.average.dice += cell.dice;
        }
        row.average.iou /= static_cast<double>(row.per_schedule.size());
        row.average.dice /= static_cast<double>(row.per_schedule.size());
        table.rows.push_back(row);
    }
    return table;
}

AblationResult run_ablation(const training::TrainConfig& cfg, std::uint64_t seed,
                            const std::vector<std::string>& schedules, int epochs_per_stage,
                            const std::function<ExperimentOptions(const std::string&, const std::string&)>& options) {
    AblationResult result;
    for (const auto& toggles : ablation_toggles()) {
        const auto method = ablation_method(toggles);
        for (const auto& name : schedules) {
            const auto spec = schedule_from_name(name, epochs_per_stage);
            auto records = run_experiment(spec, method, cfg, seed, options ? options(method, name) : ExperimentOptions{});
            result.records.insert(result.records.end(), records.begin(), records.end());
        }
    }
    result.table = ablation_table(result.records, schedules);
    return result;
}

}  // namespace acs::harness
