#include "acs/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "acs/harness/schedule.hpp"
#include "acs/training/common.hpp"

namespace acs::harness {

namespace {

using nlohmann::json;

int method_rank(const std::string& m) {
    const auto methods = all_methods();
    const auto it = std::find(methods.begin(), methods.end(), m);
    return it == methods.end() ? static_cast<int>(methods.size()) : static_cast<int>(it - methods.begin());
}

int schedule_rank(const std::string& s) {
    const std::vector<std::string> known = {"AB-C", "AC-B", "BC-A", "ABC-joint"};
    const auto it = std::find(known.begin(), known.end(), s);
    return it == known.end() ? static_cast<int>(known.size()) : static_cast<int>(it - known.begin());
}

std::vector<std::string> ordered_methods(const std::vector<MetricsRecord>& records) {
    std::set<std::string> set;
    for (const auto& r : records) set.insert(r.method);
    std::vector<std::string> out(set.begin(), set.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return method_rank(a) < method_rank(b); });
    return out;
}

std::vector<std::string> ordered_schedules(const std::vector<MetricsRecord>& records) {
    std::set<std::string> set;
    for (const auto& r : records) set.insert(r.schedule);
    std::vector<std::string> out(set.begin(), set.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return schedule_rank(a) < schedule_rank(b); });
    return out;
}

bool is_ablation_variant(const std::string& method) {
    training::LossToggles t;
    return method != "acs" && parse_ablation_method(method, t);
}

bool is_continual(const std::string& schedule) {
    return schedule.find("joint") == std::string::npos;
}

// Last stage-1 epoch and last epoch of (method, schedule); -1 when absent.
std::pair<int, int> boundary_epochs(const std::vector<MetricsRecord>& records, const std::string& method,
                                    const std::string& schedule) {
    int sw = -1, fi = -1;
    for (const auto& r : records) {
        if (r.method != method || r.schedule != schedule) continue;
        if (r.stage == 1) sw = std::max(sw, r.epoch);
        fi = std::max(fi, r.epoch);
    }
    return {sw, fi};
}

std::vector<const MetricsRecord*> select(const std::vector<MetricsRecord>& records, const std::string& method,
                                         const std::string& schedule, int epoch) {
    std::vector<const MetricsRecord*> out;
    for (const auto& r : records) {
        // At the switch epoch stage-1 rows win; stage-2 runs never record it.
        if (r.method == method && r.schedule == schedule && r.epoch == epoch) out.push_back(&r);
    }
    return out;
}

json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}, {"n", m.n}}; }

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Per (dataset) seed-mean cells of one run group at one epoch.
struct Cells {
    std::map<std::string, std::vector<double>> iou;
    std::map<std::string, std::vector<double>> dice;
};

Cells cells_of(const std::vector<const MetricsRecord*>& rows) {
    Cells c;
    for (const auto* r : rows) {
        c.iou[r->dataset].push_back(r->iou);
        c.dice[r->dataset].push_back(r->dice);
    }
    return c;
}

// Seed-level fingerprint used to detect identical baseline rows.
std::vector<std::tuple<std::uint64_t, std::string, double, double>> fingerprint(
    const std::vector<const MetricsRecord*>& rows) {
    std::vector<std::tuple<std::uint64_t, std::string, double, double>> out;
    for (const auto* r : rows) out.emplace_back(r->seed, r->dataset, r->iou, r->dice);
    std::sort(out.begin(), out.end());
    return out;
}

json block_json(const TableBlock& block) {
    json rows = json::array();
    for (const auto& row : block.rows) {
        json datasets = json::object();
        for (std::size_t i = 0; i < row.datasets.size(); ++i) {
            datasets[row.datasets[i]] = {{"iou", to_json(row.iou[i])}, {"dice", to_json(row.dice[i])}};
        }
        rows.push_back({{"label", row.label},
                        {"methods", row.methods},
                        {"datasets", datasets},
                        {"average", {{"iou", row.average_iou}, {"dice", row.average_dice}}}});
    }
    return {{"schedule", block.schedule}, {"epoch", block.epoch}, {"rows", rows}};
}

std::string block_markdown(const TableBlock& block, const std::string& title) {
    std::string md = "### " + title + "\n\n| Method |";
    const auto& datasets = block.rows.front().datasets;
    for (const auto& d : datasets) md += " Dataset " + d + " |";
    md += " Average |\n|---|";
    for (std::size_t i = 0; i <= datasets.size(); ++i) md += "---|";
    md += "\n";
    for (const auto& row : block.rows) {
        md += "| " + row.label + " |";
        for (std::size_t i = 0; i < row.datasets.size(); ++i) {
            md += " " + fixed3(row.iou[i].mean) + " / " + fixed3(row.dice[i].mean) + " |";
        }
        md += " " + fixed3(row.average_iou) + " / " + fixed3(row.average_dice) + " |\n";
    }
    return md + "\n";
}

// Mean over datasets of each seed's final-epoch Dice.
std::map<std::uint64_t, double> per_seed_final_dice(const std::vector<MetricsRecord>& records,
                                                    const std::string& method, const std::string& schedule) {
    const int fi = boundary_epochs(records, method, schedule).second;
    std::map<std::uint64_t, std::pair<double, int>> acc;
    for (const auto* r : select(records, method, schedule, fi)) {
        acc[r->seed].first += r->dice;
        ++acc[r->seed].second;
    }
    std::map<std::uint64_t, double> out;
    for (const auto& [seed, a] : acc) out[seed] = a.first / a.second;
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

TableBlock table_block(const std::vector<MetricsRecord>& records, const std::string& schedule, int epoch,
                       bool merge_identical) {
    TableBlock block;
    block.schedule = schedule;
    block.epoch = epoch;
    std::vector<std::pair<std::string, std::vector<const MetricsRecord*>>> groups;
    for (const auto& method : ordered_methods(records)) {
        if (is_ablation_variant(method)) continue;
        auto rows = select(records, method, schedule, epoch);
        if (rows.empty()) continue;
        groups.emplace_back(method, std::move(rows));
    }
    std::vector<bool> used(groups.size(), false);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (used[i]) continue;
        TableRow row;
        row.methods = {groups[i].first};
        if (merge_identical && groups[i].first != "acs") {
            const auto fp = fingerprint(groups[i].second);
            for (std::size_t j = i + 1; j < groups.size(); ++j) {
                if (!used[j] && groups[j].first != "acs" && fingerprint(groups[j].second) == fp) {
                    row.methods.push_back(groups[j].first);
                    used[j] = true;
                }
            }
        }
        if (row.methods.size() > 1) {
            row.label = "Baselines (";
            for (std::size_t k = 0; k < row.methods.size(); ++k) row.label += (k ? ", " : "") + row.methods[k];
            row.label += ")";
        } else {
            row.label = row.methods.front();
        }
        const auto cells = cells_of(groups[i].second);
        for (const auto& [dataset, values] : cells.dice) {
            row.datasets.push_back(dataset);
            row.dice.push_back(mean_std(values));
            row.iou.push_back(mean_std(cells.iou.at(dataset)));
        }
        for (std::size_t k = 0; k < row.datasets.size(); ++k) {
            row.average_iou += row.iou[k].mean;
            row.average_dice += row.dice[k].mean;
        }
        row.average_iou /= static_cast<double>(row.datasets.size());
        row.average_dice /= static_cast<double>(row.datasets.size());
        block.rows.push_back(std::move(row));
    }
    return block;
}

std::vector<Delta> compute_deltas(const std::vector<MetricsRecord>& records, const std::string& method) {
    std::vector<Delta> out;
    for (const auto& other : ordered_methods(records)) {
        if (other == method || is_ablation_variant(other)) continue;
        for (const std::string which : {"switch", "final"}) {
            std::vector<double> dd, di;
            for (const auto& schedule : ordered_schedules(records)) {
                if (which == "switch" && !is_continual(schedule)) continue;
                const auto [msw, mfi] = boundary_epochs(records, method, schedule);
                const auto [osw, ofi] = boundary_epochs(records, other, schedule);
                const int me = which == "switch" ? msw : mfi;
                const int oe = which == "switch" ? osw : ofi;
                if (me < 0 || oe < 0) continue;
                const auto a = cells_of(select(records, method, schedule, me));
                const auto b = cells_of(select(records, other, schedule, oe));
                for (const auto& [dataset, values] : a.dice) {
                    if (!b.dice.count(dataset)) continue;
                    dd.push_back(mean_std(values).mean - mean_std(b.dice.at(dataset)).mean);
                    di.push_back(mean_std(a.iou.at(dataset)).mean - mean_std(b.iou.at(dataset)).mean);
                }
            }
            if (dd.empty()) continue;
            out.push_back({method, other, which, mean_std(dd), mean_std(di)});
        }
    }
    return out;
}

json summary_json(const std::vector<MetricsRecord>& records, const std::optional<ForgettingReport>& forgetting,
                  const std::optional<AblationTable>& ablation) {
    json j;
    j["format_version"] = kSummaryFormatVersion;
    j["n_records"] = records.size();
    const auto methods = ordered_methods(records);
    const auto schedules = ordered_schedules(records);
    std::set<std::string> datasets;
    std::set<std::uint64_t> seeds;
    for (const auto& r : records) {
        datasets.insert(r.dataset);
        seeds.insert(r.seed);
    }
    j["methods"] = methods;
    j["schedules"] = schedules;
    j["datasets"] = datasets;
    j["seeds"] = seeds;

    json tables = {{"switch", json::array()}, {"final", json::array()}};
    for (const auto& schedule : schedules) {
        int sw = -1, fi = -1;
        for (const auto& m : methods) {
            if (is_ablation_variant(m)) continue;
            const auto [s, f] = boundary_epochs(records, m, schedule);
            sw = std::max(sw, s);
            fi = std::max(fi, f);
        }
        if (is_continual(schedule) && sw >= 0) tables["switch"].push_back(block_json(table_block(records, schedule, sw, true)));
        if (fi >= 0) tables["final"].push_back(block_json(table_block(records, schedule, fi, false)));
    }
    j["tables"] = tables;

    if (forgetting) {
        json rows = json::array();
        for (const auto& r : forgetting->rows) {
            rows.push_back({{"method", r.method},
                            {"schedule", r.schedule},
                            {"dataset", r.dataset},
                            {"dice_at_switch", to_json(r.dice_at_switch)},
                            {"dice_final", to_json(r.dice_final)},
                            {"absolute_drop", to_json(r.absolute_drop)},
                            {"relative_drop", to_json(r.relative_drop)}});
        }
        j["forgetting"] = rows;
    } else {
        j["forgetting"] = nullptr;
    }

    json deltas = json::array();
    if (std::find(methods.begin(), methods.end(), "acs") != methods.end()) {
        for (const auto& d : compute_deltas(records, "acs")) {
            deltas.push_back({{"method", d.method},
                              {"versus", d.versus},
                              {"epoch", d.epoch},
                              {"dice", to_json(d.dice)},
                              {"iou", to_json(d.iou)}});
        }
    }
    j["deltas"] = deltas;

    json ranking = json::object();
    for (const auto& schedule : schedules) {
        std::vector<std::pair<std::string, MeanStd>> scored;
        int min_seeds = -1;
        for (const auto& m : methods) {
            if (is_ablation_variant(m)) continue;
            const auto per_seed = per_seed_final_dice(records, m, schedule);
            if (per_seed.empty()) continue;
            std::vector<double> values;
            for (const auto& [_, v] : per_seed) values.push_back(v);
            scored.emplace_back(m, mean_std(values));
            const int n = static_cast<int>(values.size());
            min_seeds = min_seeds < 0 ? n : std::min(min_seeds, n);
        }
        json entry = {{"n_seeds", min_seeds}, {"min_seeds_required", kMinRankingSeeds}};
        if (min_seeds < kMinRankingSeeds) {
            entry["available"] = false;
            entry["order"] = nullptr;
        } else {
            std::stable_sort(scored.begin(), scored.end(),
                             [](const auto& a, const auto& b) { return a.second.mean > b.second.mean; });
            json order = json::array();
            for (std::size_t i = 0; i < scored.size(); ++i) {
                order.push_back({{"rank", i + 1}, {"method", scored[i].first}, {"final_dice", to_json(scored[i].second)}});
            }
            entry["available"] = true;
            entry["order"] = order;
        }
        ranking[schedule] = entry;
    }
    j["ranking"] = ranking;

    if (ablation && !ablation->rows.empty()) {
        json rows = json::array();
        for (const auto& row : ablation->rows) {
            json per = json::object();
            for (const auto& [s, c] : row.per_schedule) per[s] = {{"iou", c.iou}, {"dice", c.dice}};
            rows.push_back({{"method", row.method},
                            {"adv_c", row.toggles.adv_c},
                            {"vae", row.toggles.vae},
                            {"gan", row.toggles.gan},
                            {"lr", row.toggles.lr},
                            {"schedules", per},
                            {"average", {{"iou", row.average.iou}, {"dice", row.average.dice}}}});
        }
        j["ablation"] = {{"schedules", ablation->schedules}, {"rows", rows}};
    } else {
        j["ablation"] = nullptr;
    }
    return j;
}

std::string tables_markdown(const std::vector<MetricsRecord>& records, const std::optional<AblationTable>& ablation) {
    const auto schedules = ordered_schedules(records);
    std::vector<std::string> methods;
    for (const auto& m : ordered_methods(records)) {
        if (!is_ablation_variant(m)) methods.push_back(m);
    }
    auto epochs = [&](const std::string& schedule) {
        int sw = -1, fi = -1;
        for (const auto& m : methods) {
            const auto [s, f] = boundary_epochs(records, m, schedule);
            sw = std::max(sw, s);
            fi = std::max(fi, f);
        }
        return std::pair{sw, fi};
    };

    std::string md = "# Results\n\nCells are seed means of test IoU / Dice.\n\n";
    md += "## Scores at the stage switch\n\n";
    for (const auto& schedule : schedules) {
        const auto [sw, _] = epochs(schedule);
        if (!is_continual(schedule) || sw < 0) continue;
        const auto block = table_block(records, schedule, sw, true);
        if (!block.rows.empty()) md += block_markdown(block, schedule + " (epoch " + std::to_string(sw) + ")");
    }
    md += "## Final scores\n\n";
    for (const auto& schedule : schedules) {
        const auto [_, fi] = epochs(schedule);
        if (fi < 0) continue;
        const auto block = table_block(records, schedule, fi, false);
        if (!block.rows.empty()) md += block_markdown(block, schedule + " (epoch " + std::to_string(fi) + ")");
    }
    if (ablation && !ablation->rows.empty()) {
        md += "## Loss ablation\n\nFinal IoU / Dice averaged over all test datasets.\n\n";
        md += "| L_adv^c | L_VAE | L_GAN | L_lr |";
        for (const auto& s : ablation->schedules) md += " " + s + " |";
        md += " Average |\n|---|---|---|---|";
        for (std::size_t i = 0; i <= ablation->schedules.size(); ++i) md += "---|";
        md += "\n";
        auto mark = [](bool b) { return std::string(b ? " on |" : " off |"); };
        for (const auto& row : ablation->rows) {
            md += "|" + mark(row.toggles.adv_c) + mark(row.toggles.vae) + mark(row.toggles.gan) + mark(row.toggles.lr);
            for (const auto& s : ablation->schedules) {
                const auto it = row.per_schedule.find(s);
                md += it == row.per_schedule.end() ? std::string(" - |")
                                                   : " " + fixed3(it->second.iou) + " / " + fixed3(it->second.dice) + " |";
            }
            md += " " + fixed3(row.average.iou) + " / " + fixed3(row.average.dice) + " |\n";
        }
        md += "\n";
    }
    return md;
}

std::string learning_curve_svg(const std::vector<MetricsRecord>& records, const std::string& schedule,
                               const std::string& method) {
    const double w = 480, h = 300, left = 50, right = 110, top = 30, bottom = 40;
    const auto [sw, fi] = boundary_epochs(records, method, schedule);
    const double max_epoch = std::max(1, fi);
    auto px = [&](double epoch) { return left + (w - left - right) * epoch / max_epoch; };
    auto py = [&](double dice) { return top + (h - top - bottom) * (1.0 - dice); };

    std::map<std::string, std::map<int, std::vector<double>>> series;
    for (const auto& r : records) {
        if (r.method == method && r.schedule == schedule) series[r.dataset][r.epoch].push_back(r.dice);
    }

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"300\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"480\" height=\"300\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fixed2(left) + "\" y=\"18\" font-size=\"13\">" + method + " on " + schedule + "</text>\n";
    svg += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(py(0)) + "\" x2=\"" + fixed2(px(max_epoch)) + "\" y2=\"" +
           fixed2(py(0)) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(py(0)) + "\" x2=\"" + fixed2(left) + "\" y2=\"" + fixed2(py(1)) +
           "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = k / 4.0;
        svg += "<text x=\"" + fixed2(left - 6) + "\" y=\"" + fixed2(py(v) + 4) + "\" text-anchor=\"end\">" + fixed2(v) +
               "</text>\n";
    }
    svg += "<text x=\"" + fixed2(left) + "\" y=\"" + fixed2(h - 22) + "\" text-anchor=\"middle\">0</text>\n";
    svg += "<text x=\"" + fixed2(px(max_epoch)) + "\" y=\"" + fixed2(h - 22) + "\" text-anchor=\"middle\">" +
           std::to_string(static_cast<int>(max_epoch)) + "</text>\n";
    svg += "<text x=\"" + fixed2((left + px(max_epoch)) / 2) + "\" y=\"" + fixed2(h - 8) +
           "\" text-anchor=\"middle\">epoch</text>\n";
    svg += "<text x=\"14\" y=\"" + fixed2(py(0.5)) + "\" transform=\"rotate(-90 14 " + fixed2(py(0.5)) +
           ")\" text-anchor=\"middle\">Dice</text>\n";
    if (sw >= 0 && sw < fi) {
        svg += "<line x1=\"" + fixed2(px(sw)) + "\" y1=\"" + fixed2(py(0)) + "\" x2=\"" + fixed2(px(sw)) + "\" y2=\"" +
               fixed2(py(1)) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
        svg += "<text x=\"" + fixed2(px(sw) + 3) + "\" y=\"" + fixed2(py(1) + 10) + "\" fill=\"gray\">switch</text>\n";
    }
    int index = 0;
    for (const auto& [dataset, points] : series) {
        const std::string color = kPalette[index % 6];
        std::string pts;
        for (const auto& [epoch, values] : points) {
            if (!pts.empty()) pts += " ";
            pts += fixed2(px(epoch)) + "," + fixed2(py(mean_std(values).mean));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = top + 14.0 * index;
        svg += "<line x1=\"" + fixed2(w - right + 10) + "\" y1=\"" + fixed2(ly) + "\" x2=\"" + fixed2(w - right + 28) +
               "\" y2=\"" + fixed2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fixed2(w - right + 32) + "\" y=\"" + fixed2(ly + 4) + "\">Dataset " + dataset + "</text>\n";
        ++index;
    }
    return svg + "</svg>\n";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void emit_report(std::vector<MetricsRecord> records, const std::filesystem::path& out_dir) {
    if (records.empty()) throw InvalidArgument("emit_report needs at least one record");
    validate_records(records);
    sort_records(records);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "plots", ec);
    if (ec) throw IoError("cannot create " + (out_dir / "plots").string() + ": " + ec.message());

    std::optional<ForgettingReport> forgetting;
    if (std::any_of(records.begin(), records.end(), [](const auto& r) { return r.stage == 2; })) {
        std::vector<MetricsRecord> continual;
        for (const auto& r : records) {
            if (is_continual(r.schedule)) continual.push_back(r);
        }
        forgetting = compute_forgetting(continual);
    }
    std::optional<AblationTable> ablation;
    if (std::any_of(records.begin(), records.end(), [](const auto& r) { return is_ablation_variant(r.method); })) {
        std::vector<std::string> schedules;
        for (const auto& s : ordered_schedules(records)) {
            if (is_continual(s)) schedules.push_back(s);
        }
        ablation = ablation_table(records, schedules);
    }

    write_text(out_dir / "metrics.csv", records_to_csv(records));
    write_text(out_dir / "summary.json", summary_json(records, forgetting, ablation).dump(2) + "\n");
    write_text(out_dir / "tables.md", tables_markdown(records, ablation));
    for (const auto& schedule : ordered_schedules(records)) {
        for (const auto& method : ordered_methods(records)) {
            if (select(records, method, schedule, boundary_epochs(records, method, schedule).second).empty()) continue;
            write_text(out_dir / "plots" / (schedule + "_" + method + ".svg"), learning_curve_svg(records, schedule, method));
        }
    }
}

std::vector<MetricsRecord> collect_records(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "records.csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<MetricsRecord> records;
    for (const auto& f : files) {
        auto part = read_records(f);
        records.insert(records.end(), part.begin(), part.end());
    }
    return records;
}

}  // namespace acs::harness
