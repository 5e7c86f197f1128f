#include "acs/harness/experiment.hpp"

#include <algorithm>

#include "acs/baselines/train.hpp"
#include "acs/harness/ablation.hpp"
#include "acs/models/bundle.hpp"
#include "acs/training/stages.hpp"

namespace acs::harness {
namespace {

using training::DataPool;
using training::LogitsFn;
using training::TrainConfig;
using training::TrainingLog;

class Recorder {
public:
    Recorder(std::string method, const ScheduleSpec& spec, std::uint64_t seed, DataPool& pool,
             std::vector<std::string> datasets, int eval_every, double threshold)
        : method_(std::move(method)),
          spec_(spec),
          seed_(seed),
          pool_(pool),
          datasets_(std::move(datasets)),
          eval_every_(eval_every),
          threshold_(threshold) {}

    void evaluate(const LogitsFn& logits, int stage, int epoch) {
        current_epoch = epoch;
        if (!is_eval_epoch(epoch, eval_every_, spec_)) return;
        for (const auto& name : datasets_) {
            const auto counts = training::evaluate(logits, pool_.test(name), threshold_);
            records.push_back({method_, spec_.name, seed_, stage, epoch, name, counts.iou(), counts.dice()});
        }
    }

    std::vector<MetricsRecord> records;
    int current_epoch = 0;

private:
    std::string method_;
    const ScheduleSpec& spec_;
    std::uint64_t seed_;
    DataPool& pool_;
    std::vector<std::string> datasets_;
    int eval_every_;
    double threshold_;
};

training::StageOptions stage_options(const ExperimentOptions& options, const TrainConfig& cfg,
                                     training::EpochHook hook) {
    training::StageOptions out;
    out.on_epoch = std::move(hook);
    if (options.run_dir && cfg.checkpoint_every > 0) out.checkpoint_dir = *options.run_dir / "checkpoints";
    return out;
}

void write_run(const ExperimentOptions& options, const TrainingLog& log, const std::vector<MetricsRecord>& records,
               const std::function<void(const std::filesystem::path&)>& save_model) {
    if (!options.run_dir) return;
    std::filesystem::create_directories(*options.run_dir);
    log.write(*options.run_dir);
    write_records(*options.run_dir / "records.csv", records);
    save_model(*options.run_dir / "final.tar");
}

[[noreturn]] void rethrow_with_context(const std::string& method, const ScheduleSpec& spec, std::uint64_t seed,
                                       int epoch, const std::exception& e) {
    throw ExperimentError("method " + method + ", schedule " + spec.name + ", seed " + std::to_string(seed) +
                          ", epoch " + std::to_string(epoch) + ": " + e.what());
}

TrainConfig config_for(const ScheduleSpec& spec, TrainConfig cfg) {
    cfg.schedule = spec.name;
    cfg.epochs_stage1 = spec.switch_epoch();
    cfg.epochs_stage2 = spec.joint() ? 0 : spec.epochs_per_stage;
    return cfg;
}

std::vector<MetricsRecord> run_acs(const ScheduleSpec& spec, const std::string& method, const TrainConfig& cfg,
                                   std::uint64_t seed, const ExperimentOptions& options) {
    auto pool = training::build_data_pool(cfg);
    validate(spec, pool);
    Recorder rec(method, spec, seed, pool, cfg.data.names, cfg.eval_every, cfg.constants.threshold);
    try {
        auto bundle = training::make_bundle(cfg, static_cast<std::int64_t>(spec.stage1_datasets.size()), seed);
        training::OptimState opt(cfg.optim, seed);
        const auto logits = training::acs_logits(bundle);
        rec.evaluate(logits, 1, 0);
        const auto opts = stage_options(options, cfg, [&](int stage, int epoch) { rec.evaluate(logits, stage, epoch); });

        training::StagePlan p1{1, spec.stage1_datasets, spec.switch_epoch(), 0, {}};
        auto log = training::run_stage1(bundle, p1, pool, cfg, opt, seed, opts);
        if (!spec.joint()) {
            training::StagePlan p2{2, spec.stage2_datasets, spec.epochs_per_stage, spec.switch_epoch(), {}};
            log.append(training::run_stage2(bundle, p2, pool, cfg, opt, seed, opts));
        }
        write_run(options, log, rec.records, [&](const auto& path) { models::save_bundle(bundle, path); });
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        rethrow_with_context(method, spec, seed, rec.current_epoch, e);
    }
    return rec.records;
}

std::vector<MetricsRecord> run_baseline(const ScheduleSpec& spec, const std::string& method, const TrainConfig& cfg,
                                        std::uint64_t seed, const ExperimentOptions& options) {
    auto pool = training::build_data_pool(cfg);
    validate(spec, pool);
    Recorder rec(method, spec, seed, pool, cfg.data.names, cfg.eval_every, cfg.constants.threshold);
    try {
        const auto m = baselines::method_from_name(method);
        const auto plan = to_stage_datasets(spec);
        auto net = baselines::make_segmentation_net(baselines::network_kind(m), cfg.arch, seed);
        training::OptimState opt(cfg.optim, seed);
        const auto logits = baselines::net_logits(*net);
        rec.evaluate(logits, 1, 0);
        const auto opts = stage_options(options, cfg, [&](int stage, int epoch) { rec.evaluate(logits, stage, epoch); });
        auto log = baselines::baseline_stage1(*net, plan, pool, cfg, opt, seed, opts);
        if (!spec.joint()) log.append(baselines::baseline_stage2(m, *net, plan, pool, cfg, opt, seed, opts));
        write_run(options, log, rec.records, [&](const auto& path) { baselines::save_net(*net, path); });
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        rethrow_with_context(method, spec, seed, rec.current_epoch, e);
    }
    return rec.records;
}

}  // namespace

std::vector<std::string> all_methods() { return {"acs", "unet", "unet-b", "mas", "ol-kd"}; }

void check_method(const std::string& method) {
    const auto methods = all_methods();
    training::LossToggles toggles;
    if (std::find(methods.begin(), methods.end(), method) == methods.end() &&
        !parse_ablation_method(method, toggles)) {
        throw InvalidArgument("unknown method '" + method + "' (expected acs, acs:<adv><vae><gan><lr>, unet, unet-b, mas or ol-kd)");
    }
}

bool is_eval_epoch(int epoch, int eval_every, const ScheduleSpec& spec) {
    if (epoch == 0 || epoch == spec.switch_epoch() || epoch == spec.total_epochs()) return true;
    return eval_every > 0 && epoch % eval_every == 0;
}

std::vector<MetricsRecord> run_experiment(const ScheduleSpec& spec, const std::string& method,
                                          const TrainConfig& base_cfg, std::uint64_t seed,
                                          const ExperimentOptions& options) {
    check_method(method);
    auto cfg = config_for(spec, base_cfg);
    training::LossToggles toggles;
    if (parse_ablation_method(method, toggles)) {
        cfg.toggles = toggles;
        return run_acs(spec, method, cfg, seed, options);
    }
    return run_baseline(spec, method, cfg, seed, options);
}

std::map<std::string, std::vector<MetricsRecord>> run_shared_baselines(
    const ScheduleSpec& spec, const std::vector<std::string>& methods, const TrainConfig& base_cfg,
    std::uint64_t seed, const std::function<ExperimentOptions(const std::string&)>& options) {
    for (const auto& m : methods) {
        if (m != "unet" && m != "mas" && m != "ol-kd") {
            throw InvalidArgument("shared pre-switch training covers unet, mas and ol-kd, not " + m);
        }
    }
    std::map<std::string, std::vector<MetricsRecord>> out;
    if (methods.empty()) return out;
    const auto cfg = config_for(spec, base_cfg);
    const auto plan = to_stage_datasets(spec);
    auto pool = training::build_data_pool(cfg);
    validate(spec, pool);

    Recorder shared("shared", spec, seed, pool, cfg.data.names, cfg.eval_every, cfg.constants.threshold);
    auto net = baselines::make_segmentation_net("unet", cfg.arch, seed);
    training::OptimState opt(cfg.optim, seed);
    TrainingLog shared_log;
    try {
        const auto logits = baselines::net_logits(*net);
        shared.evaluate(logits, 1, 0);
        training::StageOptions opts;
        opts.on_epoch = [&](int stage, int epoch) { shared.evaluate(logits, stage, epoch); };
        shared_log = baselines::baseline_stage1(*net, plan, pool, cfg, opt, seed, opts);
    } catch (const std::exception& e) {
        rethrow_with_context("shared-unet", spec, seed, shared.current_epoch, e);
    }

    for (const auto& method : methods) {
        const ExperimentOptions run_options = options ? options(method) : ExperimentOptions{};
        Recorder rec(method, spec, seed, pool, cfg.data.names, cfg.eval_every, cfg.constants.threshold);
        for (auto r : shared.records) {
            r.method = method;
            rec.records.push_back(std::move(r));
        }
        try {
            auto branch = net->clone();
            auto log = shared_log;
            if (!spec.joint()) {
                pool.reset();
                training::OptimState branch_opt(cfg.optim, seed);
                branch_opt.set_step(opt.step());
                const auto logits = baselines::net_logits(*branch);
                const auto opts =
                    stage_options(run_options, cfg, [&](int stage, int epoch) { rec.evaluate(logits, stage, epoch); });
                log.append(baselines::baseline_stage2(baselines::method_from_name(method), *branch, plan, pool, cfg,
                                                      branch_opt, seed, opts));
            }
            write_run(run_options, log, rec.records, [&](const auto& path) { baselines::save_net(*branch, path); });
        } catch (const ExperimentError&) {
            throw;
        } catch (const std::exception& e) {
            rethrow_with_context(method, spec, seed, rec.current_epoch, e);
        }
        out[method] = std::move(rec.records);
    }
    return out;
}

}  // namespace acs::harness
