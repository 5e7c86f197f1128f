#include "acs/harness/matrix.hpp"

#include <fstream>
#include <iostream>

#include "acs/harness/ablation.hpp"
#include "acs/harness/experiment.hpp"
#include "acs/harness/report.hpp"

namespace acs::harness {

MatrixSpec matrix_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("matrix must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "config" && key != "schedules" && key != "methods" && key != "seeds" &&
            key != "epochs_per_stage" && key != "ablation") {
            throw ConfigError("unknown matrix key '" + key + "'");
        }
    }
    MatrixSpec m;
    try {
        if (!j.contains("config")) throw ConfigError("matrix needs a 'config' entry");
        const auto& c = j.at("config");
        if (c.is_string()) {
            const std::filesystem::path p = c.get<std::string>();
            m.config = training::load_config(p.is_absolute() ? p : base_dir / p);
        } else {
            m.config = training::config_from_json(c);
        }
        if (j.contains("schedules")) m.schedules = j.at("schedules").get<std::vector<std::string>>();
        if (j.contains("methods")) m.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("seeds")) m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("epochs_per_stage")) m.epochs_per_stage = j.at("epochs_per_stage").get<int>();
        if (j.contains("ablation")) m.ablation = j.at("ablation").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed matrix: ") + e.what());
    }
    for (const auto& s : m.schedules) validate(schedule_from_name(s, m.epochs_per_stage));
    for (const auto& method : m.methods) check_method(method);
    if (m.seeds.empty()) throw ConfigError("matrix needs at least one seed");
    if (m.epochs_per_stage < 1) throw ConfigError("epochs_per_stage must be >= 1");
    return m;
}

MatrixSpec load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix " + path.string());
    try {
        return matrix_from_json(nlohmann::json::parse(in), path.parent_path());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("matrix " + path.string() + " is not valid JSON: " + e.what());
    }
}

std::vector<std::uint64_t> first_seeds(int n) {
    if (n < 1) throw InvalidArgument("need at least one seed");
    std::vector<std::uint64_t> seeds;
    for (int k = 1; k <= n; ++k) seeds.push_back(static_cast<std::uint64_t>(k));
    return seeds;
}

std::filesystem::path run_directory(const std::filesystem::path& out, const std::string& schedule,
                                    const std::string& method, std::uint64_t seed) {
    return out / "runs" / schedule / method / ("seed" + std::to_string(seed));
}

std::vector<MetricsRecord> run_matrix(const MatrixSpec& matrix, const std::filesystem::path& out, bool verbose) {
    auto done = [&](const std::string& schedule, const std::string& method, std::uint64_t seed) {
        return std::filesystem::exists(run_directory(out, schedule, method, seed) / "records.csv");
    };
    auto log = [&](const std::string& what) {
        if (verbose) std::cerr << what << std::endl;
    };
    for (const auto& name : matrix.schedules) {
        const auto spec = schedule_from_name(name, matrix.epochs_per_stage);
        for (const auto seed : matrix.seeds) {
            std::vector<std::string> shared;
            for (const auto& method : matrix.methods) {
                if (done(name, method, seed)) continue;
                if (matrix.config.shared_pretrain && (method == "unet" || method == "mas" || method == "ol-kd")) {
                    shared.push_back(method);
                    continue;
                }
                log("run " + name + " " + method + " seed " + std::to_string(seed));
                ExperimentOptions options{run_directory(out, name, method, seed)};
                run_experiment(spec, method, matrix.config, seed, options);
            }
            if (!shared.empty()) {
                log("run " + name + " shared baselines seed " + std::to_string(seed));
                run_shared_baselines(spec, shared, matrix.config, seed, [&](const std::string& method) {
                    return ExperimentOptions{run_directory(out, name, method, seed)};
                });
            }
        }
    }
    if (matrix.ablation) {
        for (const auto& toggles : ablation_toggles()) {
            const auto method = ablation_method(toggles);
            for (const auto& name : matrix.schedules) {
                const auto spec = schedule_from_name(name, matrix.epochs_per_stage);
                if (spec.joint()) continue;
                for (const auto seed : matrix.seeds) {
                    if (done(name, method, seed)) continue;
                    log("run " + name + " " + method + " seed " + std::to_string(seed));
                    run_experiment(spec, method, matrix.config, seed, {run_directory(out, name, method, seed)});
                }
            }
        }
    }
    return collect_records(out / "runs");
}

}  // namespace acs::harness
