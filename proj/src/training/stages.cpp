#include "acs/training/stages.hpp"

#include <algorithm>

#include "acs/data/rng.hpp"
#include "acs/losses/losses.hpp"
#include "acs/models/ops.hpp"

namespace acs::training {
namespace {

using models::Collection;

std::vector<std::int64_t> to_vector(const torch::Tensor& t) {
    const auto c = t.to(torch::kLong).contiguous();
    return {c.data_ptr<std::int64_t>(), c.data_ptr<std::int64_t>() + c.numel()};
}

void set_requires_grad(ModelBundle& bundle, bool discriminators) {
    for (Collection c : models::kAllCollections) {
        const bool on = bundle.trainable(c) && (models::is_discriminator(c) == discriminators);
        for (auto& [_, p] : bundle.collection_parameters(c)) p.requires_grad_(on);
    }
}

models::NamedTensors parameters_of(ModelBundle& bundle, bool discriminators) {
    models::NamedTensors out;
    for (Collection c : models::kAllCollections) {
        if (models::is_discriminator(c) != discriminators || !bundle.trainable(c)) continue;
        auto part = bundle.collection_parameters(c);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::uint64_t stage_noise_seed(std::uint64_t seed, int stage) {
    auto rng = data::keyed_engine({seed, static_cast<std::uint64_t>(stage), 0x401E});
    return rng();
}

std::vector<int> dataset_keys(DataPool& data, const std::vector<std::string>& names) {
    std::vector<int> keys;
    for (const auto& n : names) keys.push_back(data.domain_id(n));
    return keys;
}

void evaluate_split(ModelBundle& bundle, DataPool& data, const std::vector<std::string>& names, int stage, int epoch,
                    double threshold, TrainingLog& log) {
    const auto logits = acs_logits(bundle);
    for (const auto& name : names) {
        const auto counts = evaluate(logits, data.val(name), threshold);
        log.evals.push_back({stage, epoch, name, "val", counts.iou(), counts.dice()});
    }
}

void maybe_checkpoint(ModelBundle& bundle, const TrainConfig& cfg, const StageOptions& options, int stage,
                      int epoch) {
    if (!options.checkpoint_dir || cfg.checkpoint_every <= 0 || epoch % cfg.checkpoint_every != 0) return;
    std::filesystem::create_directories(*options.checkpoint_dir);
    models::save_bundle(bundle, *options.checkpoint_dir / ("checkpoint_stage" + std::to_string(stage) + "_epoch" +
                                                           std::to_string(epoch) + ".tar"));
}

}  // namespace

std::set<std::string> select_trainable(ModelBundle& bundle, const StagePlan& plan) {
    std::set<std::string> names;
    if (plan.stage_id == 1) {
        for (const auto& [n, _] : bundle.named_parameters()) names.insert(n);
    } else {
        for (const auto& n : bundle.finetune_parameter_names()) names.insert(n);
    }
    return names;
}

void prepare_stage1_optim(ModelBundle& bundle, OptimState& opt) {
    opt.add_group(kDiscGroup, parameters_of(bundle, true));
    opt.add_group(kMainGroup, parameters_of(bundle, false));
}

DiscriminatorLosses step_discriminators(ModelBundle& bundle, const TensorBatch& batch, const TrainConfig& cfg,
                                        OptimState& opt, const StagePlan& plan) {
    if (plan.stage_id != 1) throw InvalidArgument("discriminator steps only run in stage 1");
    DiscriminatorLosses out;
    if (!cfg.toggles.gan && !cfg.toggles.adv_c) return out;

    const auto n_domains = bundle.config().n_domains;
    const auto dtype = batch.images.scalar_type();
    const auto codes = models::make_domain_codes(to_vector(batch.domains), n_domains, dtype);

    models::ContentRepresentation real_rep;
    models::ContentRepresentation fake_rep;
    torch::Tensor fake;
    {
        torch::NoGradGuard no_grad;
        real_rep = models::content_encode(bundle, batch.images);
        const auto z = torch::randn({batch.images.size(0)}, opt.rng(), torch::TensorOptions().dtype(dtype));
        const auto f_ds = models::latent_scale(bundle, z, real_rep.z_c.size(2), real_rep.z_c.size(3));
        fake = models::generate(bundle, real_rep.z_c, f_ds, codes);
        if (cfg.toggles.adv_c) fake_rep = models::content_encode(bundle, fake);
    }

    set_requires_grad(bundle, /*discriminators=*/true);
    auto total = torch::zeros({}, torch::TensorOptions().dtype(dtype));
    if (cfg.toggles.gan) {
        const auto d_real = models::discriminate_domain(bundle, batch.images, codes);
        const auto d_fake = models::discriminate_domain(bundle, fake, codes);
        const auto l = losses::loss_gan_d(d_real, d_fake, cfg.constants.prob_clamp);
        out.d_d = l.item<double>();
        check_finite("d_d", out.d_d);
        total = total + l;
    }
    if (cfg.toggles.adv_c) {
        const auto l = losses::loss_content_adv_d(models::discriminate_content(bundle, real_rep), batch.domains,
                                                  models::discriminate_content(bundle, fake_rep));
        out.d_c = l.item<double>();
        check_finite("d_c", out.d_c);
        total = total + l;
    }
    auto& optimizer = opt.group(kDiscGroup);
    optimizer.zero_grad();
    total.backward();
    optimizer.step();
    return out;
}

MainLosses step_main(ModelBundle& bundle, const TensorBatch& batch, const TrainConfig& cfg, OptimState& opt,
                     const StagePlan& plan) {
    if (plan.stage_id != 1) throw InvalidArgument("the full ACS objective only runs in stage 1");
    const auto& w = cfg.weights;
    const auto n_domains = bundle.config().n_domains;
    const auto dtype = batch.images.scalar_type();
    const auto options = torch::TensorOptions().dtype(dtype);
    const auto codes = models::make_domain_codes(to_vector(batch.domains), n_domains, dtype);
    const auto n = batch.images.size(0);

    set_requires_grad(bundle, /*discriminators=*/false);
    MainLosses out;
    const auto rep = models::content_encode(bundle, batch.images);
    const auto grid_h = rep.z_c.size(2);
    const auto grid_w = rep.z_c.size(3);

    const auto seg = losses::loss_segmentation_logits(models::segment_logits(bundle, rep), batch.masks, w.w_dice, cfg.constants);
    out.seg = seg.item<double>();
    check_finite("seg", out.seg);
    auto total = w.w_seg * seg;

    if (cfg.toggles.vae) {
        const auto latent = models::domain_encode(bundle, batch.images);
        const auto noise = torch::randn({n}, opt.rng(), options);
        const auto z_d = models::reparam_sample(latent, noise);
        const auto x_rec =
            models::generate(bundle, rep.z_c, models::latent_scale(bundle, z_d, grid_h, grid_w), codes);
        const auto l = losses::loss_vae(batch.images, x_rec, latent, w.eta);
        out.vae = l.item<double>();
        check_finite("vae", out.vae);
        total = total + w.w_vae * l;
    }
    if (cfg.toggles.gan || cfg.toggles.lr) {
        const auto z = torch::randn({n}, opt.rng(), options);
        const auto x_gen = models::generate(bundle, rep.z_c, models::latent_scale(bundle, z, grid_h, grid_w), codes);
        if (cfg.toggles.gan) {
            const auto l = losses::loss_gan_g(models::discriminate_domain(bundle, x_gen, codes), cfg.constants.prob_clamp);
            out.gan_g = l.item<double>();
            check_finite("gan_g", out.gan_g);
            total = total + w.w_gan * l;
        }
        if (cfg.toggles.lr) {
            const auto l = losses::loss_latent_regression(z, models::domain_encode(bundle, x_gen).mu);
            out.lr = l.item<double>();
            check_finite("lr", out.lr);
            total = total + w.w_lr * l;
        }
    }
    if (cfg.toggles.adv_c) {
        const auto l = losses::loss_content_adv_e(models::discriminate_content(bundle, rep));
        out.adv_e = l.item<double>();
        check_finite("adv_e", out.adv_e);
        total = total + w.w_adv_c * l;
    }
    out.total = total.item<double>();
    check_finite("total", out.total);

    auto& optimizer = opt.group(kMainGroup);
    optimizer.zero_grad();
    total.backward();
    optimizer.step();
    opt.advance();
    return out;
}

TrainingLog run_stage1(ModelBundle& bundle, StagePlan plan, DataPool& data, const TrainConfig& cfg, OptimState& opt,
                       std::uint64_t seed, const StageOptions& options) {
    if (plan.stage_id != 1) throw InvalidArgument("run_stage1 needs a stage-1 plan");
    if (plan.datasets.size() < 2) {
        throw InvalidArgument("stage 1 disentangles domains and needs at least 2 simultaneously available datasets, got " +
                              std::to_string(plan.datasets.size()));
    }
    if (static_cast<std::int64_t>(plan.datasets.size()) != bundle.config().n_domains) {
        throw InvalidArgument("bundle is configured for " + std::to_string(bundle.config().n_domains) +
                              " domains but the plan lists " + std::to_string(plan.datasets.size()));
    }
    if (plan.trainable.empty()) plan.trainable = select_trainable(bundle, plan);

    data.set_stage(1);
    opt.reseed(stage_noise_seed(seed, 1));
    if (!opt.has_group(kDiscGroup) || !opt.has_group(kMainGroup)) prepare_stage1_optim(bundle, opt);

    const auto keys = dataset_keys(data, plan.datasets);
    TrainingLog log;
    for (int e = 0; e < plan.epochs; ++e) {
        const int epoch = plan.first_epoch + e + 1;
        std::vector<const data::Dataset*> sets;
        std::vector<std::size_t> sizes;
        for (const auto& name : plan.datasets) {
            sets.push_back(&data.train(name));
            sizes.push_back(sets.back()->size());
        }
        for (const auto& mb : interleaved_batches(sizes, keys, cfg.batch_size, seed, epoch)) {
            const auto batch = collate(sets, mb);
            DiscriminatorLosses d;
            for (int k = 0; k < cfg.optim.disc_steps_per_main; ++k) d = step_discriminators(bundle, batch, cfg, opt, plan);
            const auto m = step_main(bundle, batch, cfg, opt, plan);
            log.steps.push_back({opt.step(), 1, epoch, m.seg, m.vae, m.gan_g, m.lr, m.adv_e, d.d_d, d.d_c, 0.0});
        }
        evaluate_split(bundle, data, plan.datasets, 1, epoch, cfg.constants.threshold, log);
        maybe_checkpoint(bundle, cfg, options, 1, epoch);
        if (options.on_epoch) options.on_epoch(1, epoch);
    }
    bundle.completed_stage = std::max(bundle.completed_stage, 1);
    return log;
}

TrainingLog run_stage2(ModelBundle& bundle, StagePlan plan, DataPool& data, const TrainConfig& cfg, OptimState& opt,
                       std::uint64_t seed, const StageOptions& options) {
    if (plan.stage_id != 2) throw InvalidArgument("run_stage2 needs a stage-2 plan");
    if (bundle.completed_stage < 1) throw InvalidArgument("stage 2 needs a bundle that completed stage 1");
    if (plan.datasets.empty()) throw InvalidArgument("stage 2 needs at least one new dataset");
    const auto expected = select_trainable(bundle, plan);
    if (!plan.trainable.empty() && plan.trainable != expected) {
        throw InvalidArgument("stage-2 trainable set must equal the last four convolutions of S");
    }
    plan.trainable = expected;

    data.release_all_except(plan.datasets);
    data.set_stage(2);
    opt.reseed(stage_noise_seed(seed, 2));

    models::NamedTensors tail;
    for (auto& [name, p] : bundle.named_parameters()) {
        const bool on = plan.trainable.count(name) != 0;
        p.requires_grad_(on);
        if (on) tail.emplace_back(name, p);
    }
    opt.add_group(kFinetuneGroup, tail);
    auto& optimizer = opt.group(kFinetuneGroup);

    const auto keys = dataset_keys(data, plan.datasets);
    TrainingLog log;
    for (int e = 0; e < plan.epochs; ++e) {
        const int epoch = plan.first_epoch + e + 1;
        std::vector<const data::Dataset*> sets;
        std::vector<std::size_t> sizes;
        for (const auto& name : plan.datasets) {
            sets.push_back(&data.train(name));
            sizes.push_back(sets.back()->size());
        }
        for (const auto& mb : interleaved_batches(sizes, keys, cfg.batch_size, seed, epoch)) {
            const auto batch = collate(sets, mb);
            models::ContentRepresentation rep;
            {
                torch::NoGradGuard no_grad;
                rep = models::content_encode(bundle, batch.images);
            }
            const auto seg = losses::loss_segmentation_logits(models::segment_logits(bundle, rep), batch.masks, cfg.weights.w_dice,
                                                       cfg.constants);
            StepRecord rec;
            rec.seg = seg.item<double>();
            check_finite("seg", rec.seg);
            optimizer.zero_grad();
            seg.backward();
            optimizer.step();
            opt.advance();
            rec.step = opt.step();
            rec.stage = 2;
            rec.epoch = epoch;
            log.steps.push_back(rec);
        }
        evaluate_split(bundle, data, plan.datasets, 2, epoch, cfg.constants.threshold, log);
        maybe_checkpoint(bundle, cfg, options, 2, epoch);
        if (options.on_epoch) options.on_epoch(2, epoch);
    }
    for (auto& [_, p] : bundle.named_parameters()) p.requires_grad_(true);
    bundle.completed_stage = 2;
    return log;
}

ModelBundle make_bundle(const TrainConfig& cfg, std::int64_t n_domains, std::uint64_t seed) {
    torch::manual_seed(seed);
    auto arch = cfg.arch;
    arch.n_domains = n_domains;
    return ModelBundle(arch);
}

LogitsFn acs_logits(ModelBundle& bundle) {
    return [&bundle](const torch::Tensor& x) {
        return models::segment_logits(bundle, models::content_encode(bundle, x));
    };
}

std::uint64_t hash_parameters(const models::NamedTensors& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [name, t] : params) {
        mix(reinterpret_cast<const unsigned char*>(name.data()), name.size());
        const auto c = t.detach().contiguous();
        mix(static_cast<const unsigned char*>(c.data_ptr()), static_cast<std::size_t>(c.nbytes()));
    }
    return h;
}

std::uint64_t hash_collection(ModelBundle& bundle, models::Collection c) {
    return hash_parameters(bundle.collection_parameters(c));
}

}  // namespace acs::training
