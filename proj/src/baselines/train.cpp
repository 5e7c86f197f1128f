#include "acs/baselines/train.hpp"

#include "acs/errors.hpp"
#include "acs/losses/losses.hpp"

namespace acs::baselines {

using training::DataPool;
using training::OptimState;
using training::StageOptions;
using training::TrainConfig;
using training::TrainingLog;

const char* method_name(Method m) {
    switch (m) {
        case Method::UNet: return "unet";
        case Method::UNetB: return "unet-b";
        case Method::MAS: return "mas";
        case Method::OLKD: return "ol-kd";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::UNet, Method::UNetB, Method::MAS, Method::OLKD}) {
        if (name == method_name(m)) return m;
    }
    throw InvalidArgument("unknown baseline method '" + name + "' (expected unet, unet-b, mas or ol-kd)");
}

std::string network_kind(Method m) { return m == Method::UNetB ? "unet-b" : "unet"; }

training::LogitsFn net_logits(SegmentationNet& net) {
    return [&net](const torch::Tensor& x) { return net.logits(x); };
}

TrainingLog train_segmentation_stage(SegmentationNet& net, const std::vector<std::string>& datasets, DataPool& data,
                                     const TrainConfig& cfg, OptimState& opt, int stage, int first_epoch, int epochs,
                                     std::uint64_t seed, const Regularizer& reg, const StageOptions& options) {
    if (datasets.empty()) throw InvalidArgument("a training stage needs at least one dataset");
    data.set_stage(stage);
    net.set_requires_grad(true);
    opt.add_group(kSegGroup, net.named_parameters());
    auto& optimizer = opt.group(kSegGroup);

    std::vector<int> keys;
    for (const auto& n : datasets) keys.push_back(data.domain_id(n));
    const auto logits_fn = net_logits(net);
    TrainingLog log;
    for (int e = 0; e < epochs; ++e) {
        const int epoch = first_epoch + e + 1;
        std::vector<const data::Dataset*> sets;
        std::vector<std::size_t> sizes;
        for (const auto& name : datasets) {
            sets.push_back(&data.train(name));
            sizes.push_back(sets.back()->size());
        }
        for (const auto& mb : training::interleaved_batches(sizes, keys, cfg.batch_size, seed, epoch)) {
            const auto batch = training::collate(sets, mb);
            const auto logits = net.logits(batch.images);
            const auto seg =
                losses::loss_segmentation_logits(logits, batch.masks, cfg.weights.w_dice, cfg.constants);
            training::StepRecord rec;
            rec.seg = seg.item<double>();
            training::check_finite("seg", rec.seg);
            auto total = seg;
            if (reg.term) {
                if (reg.weight != 0) {
                    const auto r = reg.term(batch, logits);
                    rec.reg = r.item<double>();
                    training::check_finite("reg", rec.reg);
                    total = total + reg.weight * r;
                } else {
                    torch::NoGradGuard no_grad;
                    rec.reg = reg.term(batch, logits.detach()).item<double>();
                }
            }
            optimizer.zero_grad();
            total.backward();
            optimizer.step();
            opt.advance();
            rec.step = opt.step();
            rec.stage = stage;
            rec.epoch = epoch;
            log.steps.push_back(rec);
        }
        for (const auto& name : datasets) {
            const auto counts = training::evaluate(logits_fn, data.val(name), cfg.constants.threshold);
            log.evals.push_back({stage, epoch, name, "val", counts.iou(), counts.dice()});
        }
        if (options.checkpoint_dir && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
            std::filesystem::create_directories(*options.checkpoint_dir);
            save_net(net, *options.checkpoint_dir / ("checkpoint_stage" + std::to_string(stage) + "_epoch" +
                                                     std::to_string(epoch) + ".tar"));
        }
        if (options.on_epoch) options.on_epoch(stage, epoch);
    }
    return log;
}

TrainingLog baseline_stage1(SegmentationNet& net, const StageDatasets& plan, DataPool& data, const TrainConfig& cfg,
                            OptimState& opt, std::uint64_t seed, const StageOptions& options) {
    return train_segmentation_stage(net, plan.stage1, data, cfg, opt, 1, 0, plan.epochs_stage1, seed, {}, options);
}

TrainingLog baseline_stage2(Method method, SegmentationNet& net, const StageDatasets& plan, DataPool& data,
                            const TrainConfig& cfg, OptimState& opt, std::uint64_t seed,
                            const StageOptions& options) {
    if (plan.stage2.empty()) throw InvalidArgument("joint training has no second stage");
    if (network_kind(method) != net.kind()) {
        throw InvalidArgument(std::string("method ") + method_name(method) + " expects a " + network_kind(method) +
                              " network, got " + net.kind());
    }
    Regularizer reg;
    if (method == Method::MAS) {
        std::vector<const data::Dataset*> old;
        for (const auto& name : plan.stage1) old.push_back(&data.train(name));
        auto importance = std::make_shared<ImportanceMap>(mas_importance(net, old));
        auto anchor = std::make_shared<models::NamedTensors>(snapshot_parameters(net.named_parameters()));
        reg.weight = cfg.mas_lambda;
        reg.term = [&net, importance, anchor](const training::TensorBatch&, const torch::Tensor&) {
            return mas_penalty(net.named_parameters(), *anchor, *importance, 1.0);
        };
    } else if (method == Method::OLKD) {
        auto teacher = std::make_shared<TeacherSnapshot>(net);
        const double temperature = cfg.kd_temperature;
        reg.weight = cfg.kd_weight;
        reg.term = [teacher, temperature](const training::TensorBatch& batch, const torch::Tensor& logits) {
            return kd_output_loss(logits, teacher->logits(batch.images), temperature);
        };
    }
    data.release_all_except(plan.stage2);
    return train_segmentation_stage(net, plan.stage2, data, cfg, opt, 2, plan.epochs_stage1, plan.epochs_stage2, seed,
                                    reg, options);
}

BaselineRun train_baseline(Method method, const TrainConfig& cfg, DataPool& data, const StageDatasets& plan,
                           std::uint64_t seed, const StageOptions& options) {
    BaselineRun run;
    run.net = make_segmentation_net(network_kind(method), cfg.arch, seed);
    OptimState opt(cfg.optim, seed);
    run.log = baseline_stage1(*run.net, plan, data, cfg, opt, seed, options);
    if (!plan.stage2.empty()) run.log.append(baseline_stage2(method, *run.net, plan, data, cfg, opt, seed, options));
    return run;
}

BaselineRun train_unet(const TrainConfig& cfg, DataPool& data, const StageDatasets& plan, std::uint64_t seed,
                       const StageOptions& options) {
    return train_baseline(Method::UNet, cfg, data, plan, seed, options);
}

BaselineRun train_unet_b(const TrainConfig& cfg, DataPool& data, const StageDatasets& plan, std::uint64_t seed,
                         const StageOptions& options) {
    return train_baseline(Method::UNetB, cfg, data, plan, seed, options);
}

BaselineRun train_with_regularizer(const TrainConfig& cfg, DataPool& data, const StageDatasets& plan,
                                   std::uint64_t seed, Method method, const StageOptions& options) {
    if (method != Method::MAS && method != Method::OLKD) {
        throw InvalidArgument("train_with_regularizer takes mas or ol-kd");
    }
    return train_baseline(method, cfg, data, plan, seed, options);
}

}  // namespace acs::baselines
