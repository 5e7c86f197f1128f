#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "acs/baselines/train.hpp"
#include "acs/data/io.hpp"
#include "acs/data/synthetic.hpp"
#include "acs/harness/experiment.hpp"
#include "acs/harness/matrix.hpp"
#include "acs/harness/report.hpp"
#include "acs/models/bundle.hpp"
#include "acs/training/stages.hpp"

namespace fs = std::filesystem;
using namespace acs;

namespace {

training::StageOptions stage_options(const training::TrainConfig& cfg, const fs::path& out) {
    training::StageOptions opts;
    if (cfg.checkpoint_every > 0) opts.checkpoint_dir = out / "checkpoints";
    return opts;
}

void synth_data(const fs::path& spec, const fs::path& out, std::uint64_t seed) {
    const auto cfg = training::load_config(spec);
    const data::Shape shape{cfg.data.height, cfg.data.width};
    for (std::size_t i = 0; i < cfg.data.names.size(); ++i) {
        const auto& name = cfg.data.names[i];
        const auto ds = data::generate_synthetic_domain(cfg.data.domains.at(name), cfg.data.n_subjects,
                                                        cfg.data.slices_per_subject, shape, seed + 1000 * i, name,
                                                        static_cast<int>(i));
        data::save_dataset(ds, out / name);
        std::cout << "wrote " << (out / name).string() << " (" << ds.slices.size() << " slices)\n";
    }
}

void train(const fs::path& config, const std::string& stage, std::uint64_t seed, const fs::path& out) {
    const auto cfg = training::load_config(config);
    const auto spec = harness::schedule_from_name(cfg.schedule, cfg.epochs_stage1);
    auto pool = training::build_data_pool(cfg);
    harness::validate(spec, pool);
    fs::create_directories(out);
    const auto stage1_model = out / "stage1.tar";
    const auto stage1_optim = out / "stage1_optim.bin";
    const int epochs1 = spec.joint() ? cfg.epochs_stage1 + cfg.epochs_stage2 : cfg.epochs_stage1;

    if (stage == "1" || stage == "all") {
        auto bundle = training::make_bundle(cfg, static_cast<std::int64_t>(spec.stage1_datasets.size()), seed);
        training::OptimState opt(cfg.optim, seed);
        auto log = training::run_stage1(bundle, {1, spec.stage1_datasets, epochs1, 0, {}}, pool, cfg, opt, seed,
                                        stage_options(cfg, out));
        if (stage == "all" && !spec.joint()) {
            log.append(training::run_stage2(bundle, {2, spec.stage2_datasets, cfg.epochs_stage2, epochs1, {}}, pool,
                                            cfg, opt, seed, stage_options(cfg, out)));
            models::save_bundle(bundle, out / "final.tar");
        } else {
            models::save_bundle(bundle, stage1_model);
            opt.save(stage1_optim);
            if (stage == "all") models::save_bundle(bundle, out / "final.tar");
        }
        log.write(out);
        return;
    }
    if (spec.joint()) throw InvalidArgument("joint schedules have no stage 2");
    if (!fs::exists(stage1_model)) throw IoError("stage 2 needs " + stage1_model.string() + " from a stage-1 run");
    auto bundle = models::load_bundle(stage1_model);
    training::OptimState opt(cfg.optim, seed);
    opt.load(stage1_optim);
    const auto log = training::run_stage2(bundle, {2, spec.stage2_datasets, cfg.epochs_stage2, epochs1, {}}, pool,
                                          cfg, opt, seed, stage_options(cfg, out));
    log.write(out / "stage2");
    models::save_bundle(bundle, out / "final.tar");
}

void baseline(const std::string& method, const fs::path& config, std::uint64_t seed, const fs::path& out) {
    const auto cfg = training::load_config(config);
    const auto m = baselines::method_from_name(method);
    const auto spec = harness::schedule_from_name(cfg.schedule, cfg.epochs_stage1);
    auto pool = training::build_data_pool(cfg);
    harness::validate(spec, pool);
    baselines::StageDatasets plan{spec.stage1_datasets, spec.stage2_datasets, cfg.epochs_stage1, cfg.epochs_stage2};
    if (spec.joint()) plan.epochs_stage1 = cfg.epochs_stage1 + cfg.epochs_stage2;
    fs::create_directories(out);
    auto net = baselines::make_segmentation_net(baselines::network_kind(m), cfg.arch, seed);
    training::OptimState opt(cfg.optim, seed);
    auto log = baselines::baseline_stage1(*net, plan, pool, cfg, opt, seed, stage_options(cfg, out));
    if (!spec.joint()) {
        log.append(baselines::baseline_stage2(m, *net, plan, pool, cfg, opt, seed, stage_options(cfg, out)));
    }
    log.write(out);
    baselines::save_net(*net, out / "final.tar");
}

void experiment(const fs::path& matrix_path, const fs::path& out, int seeds) {
    auto matrix = harness::load_matrix(matrix_path);
    if (seeds > 0) matrix.seeds = harness::first_seeds(seeds);
    const auto records = harness::run_matrix(matrix, out, /*verbose=*/true);
    harness::emit_report(records, out);
    std::cout << "wrote report to " << out.string() << " (" << records.size() << " records)\n";
}

void report(const fs::path& in) {
    const auto runs = fs::is_directory(in / "runs") ? in / "runs" : in;
    const auto records = harness::collect_records(runs);
    harness::emit_report(records, in);
    std::cout << "wrote report to " << in.string() << " (" << records.size() << " records)\n";
}

}  // namespace

int main(int argc, char** argv) {
    torch::set_num_threads(1);
    CLI::App app{"Adversarial continual segmentation: data, training, baselines and experiments"};
    app.require_subcommand(1);

    fs::path spec, out, config, matrix, in;
    std::uint64_t seed = 0;
    std::string stage = "all";
    std::string method;
    int seeds = 0;

    auto* synth = app.add_subcommand("synth-data", "Generate the synthetic datasets of a config");
    synth->add_option("--spec", spec, "Config file (data.* keys)")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", out, "Output root; one directory per dataset")->required();
    synth->add_option("--seed", seed, "Generation seed")->required();

    auto* tr = app.add_subcommand("train", "Train ACS on the schedule named in the config");
    tr->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    tr->add_option("--stage", stage, "Stage to run")->check(CLI::IsMember({"1", "2", "all"}));
    tr->add_option("--seed", seed, "Run seed")->required();
    tr->add_option("--out", out, "Output directory")->required();

    auto* bl = app.add_subcommand("baseline", "Train a baseline on the schedule named in the config");
    bl->add_option("--method", method, "Baseline")->required()->check(CLI::IsMember({"unet", "unet-b", "mas", "ol-kd"}));
    bl->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    bl->add_option("--seed", seed, "Run seed")->required();
    bl->add_option("--out", out, "Output directory")->required();

    auto* ex = app.add_subcommand("experiment", "Run an experiment matrix and emit its report");
    ex->add_option("--matrix", matrix, "Matrix file")->required()->check(CLI::ExistingFile);
    ex->add_option("--out", out, "Output directory")->required();
    ex->add_option("--seeds", seeds, "Use seeds 1..N instead of the matrix seeds")->check(CLI::PositiveNumber);

    auto* rp = app.add_subcommand("report", "Re-emit the report from the records of a results directory");
    rp->add_option("--in", in, "Results directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*synth) synth_data(spec, out, seed);
        if (*tr) train(config, stage, seed, out);
        if (*bl) baseline(method, config, seed, out);
        if (*ex) experiment(matrix, out, seeds);
        if (*rp) report(in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
