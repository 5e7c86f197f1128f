#include "acs/harness/forgetting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "acs/errors.hpp"
#include "acs/harness/schedule.hpp"

namespace acs::harness {

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    out.n = static_cast<int>(values.size());
    if (values.empty()) return out;
    double sum = 0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    double sq = 0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

const ForgettingRow& ForgettingReport::row(const std::string& method, const std::string& schedule,
                                           const std::string& dataset) const {
    for (const auto& r : rows) {
        if (r.method == method && r.schedule == schedule && r.dataset == dataset) return r;
    }
    throw InvalidArgument("no forgetting row for " + method + "/" + schedule + "/" + dataset);
}

ForgettingEntry forgetting_entry(double dice_at_switch, double dice_final) {
    ForgettingEntry e;
    e.dice_at_switch = dice_at_switch;
    e.dice_final = dice_final;
    e.absolute_drop = dice_at_switch - dice_final;
    e.relative_drop = e.absolute_drop / std::max(dice_at_switch, kRelativeDropEpsilon);
    return e;
}

ForgettingReport compute_forgetting(const std::vector<MetricsRecord>& records) {
    using RunKey = std::tuple<std::string, std::string, std::uint64_t>;
    std::map<RunKey, std::vector<const MetricsRecord*>> runs;
    for (const auto& r : records) runs[{r.method, r.schedule, r.seed}].push_back(&r);

    ForgettingReport report;
    for (const auto& [key, rows] : runs) {
        const auto& [method, schedule, seed] = key;
        const auto spec = schedule_from_name(schedule);
        if (spec.joint()) continue;
        int switch_epoch = -1;
        int final_epoch = -1;
        for (const auto* r : rows) {
            if (r->stage == 1) switch_epoch = std::max(switch_epoch, r->epoch);
            if (r->stage == 2) final_epoch = std::max(final_epoch, r->epoch);
        }
        if (switch_epoch < 0 || final_epoch < 0) {
            throw InvalidArgument("run " + method + "/" + schedule + "/seed " + std::to_string(seed) +
                                  " lacks stage-1 or stage-2 evaluation rows");
        }
        std::set<std::string> datasets;
        for (const auto* r : rows) datasets.insert(r->dataset);
        double old_switch = 0;
        double old_final = 0;
        const auto old = old_datasets(spec);
        for (const auto& ds : datasets) {
            const MetricsRecord* at_switch = nullptr;
            const MetricsRecord* at_final = nullptr;
            for (const auto* r : rows) {
                if (r->dataset != ds) continue;
                if (r->stage == 1 && r->epoch == switch_epoch) at_switch = r;
                if (r->stage == 2 && r->epoch == final_epoch) at_final = r;
            }
            if (at_switch == nullptr || at_final == nullptr) {
                throw InvalidArgument("run " + method + "/" + schedule + "/seed " + std::to_string(seed) +
                                      " lacks epoch " + std::to_string(switch_epoch) + " or " +
                                      std::to_string(final_epoch) + " for dataset " + ds);
            }
            auto e = forgetting_entry(at_switch->dice, at_final->dice);
            e.method = method;
            e.schedule = schedule;
            e.seed = seed;
            e.dataset = ds;
            report.entries.push_back(e);
            if (std::find(old.begin(), old.end(), ds) != old.end()) {
                old_switch += at_switch->dice;
                old_final += at_final->dice;
            }
        }
        for (const auto& ds : old) {
            if (datasets.count(ds) == 0) {
                throw InvalidArgument("run " + method + "/" + schedule + " has no rows for old dataset " + ds);
            }
        }
        const auto n_old = static_cast<double>(old.size());
        auto e = forgetting_entry(old_switch / n_old, old_final / n_old);
        e.method = method;
        e.schedule = schedule;
        e.seed = seed;
        e.dataset = kOldAverage;
        report.entries.push_back(e);
    }

    using RowKey = std::tuple<std::string, std::string, std::string>;
    std::map<RowKey, std::vector<const ForgettingEntry*>> groups;
    for (const auto& e : report.entries) groups[{e.method, e.schedule, e.dataset}].push_back(&e);
    for (const auto& [key, entries] : groups) {
        ForgettingRow row;
        std::tie(row.method, row.schedule, row.dataset) = key;
        std::vector<double> sw, fi, ab, re;
        for (const auto* e : entries) {
            sw.push_back(e->dice_at_switch);
            fi.push_back(e->dice_final);
            ab.push_back(e->absolute_drop);
            re.push_back(e->relative_drop);
        }
        row.dice_at_switch = mean_std(sw);
        row.dice_final = mean_std(fi);
        row.absolute_drop = mean_std(ab);
        row.relative_drop = mean_std(re);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace acs::harness
