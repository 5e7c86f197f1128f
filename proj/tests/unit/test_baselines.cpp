#include <doctest.h>

#include <cmath>
#include <set>

#include "acs/baselines/networks.hpp"
#include "acs/baselines/regularizers.hpp"
#include "acs/baselines/train.hpp"
#include "acs/errors.hpp"
#include "acs/training/stages.hpp"
#include "support/oracles.hpp"

using namespace acs;
using namespace acs::baselines;
using training::TrainConfig;

namespace {

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.data.n_subjects = 10;
    cfg.data.slices_per_subject = 2;
    cfg.batch_size = 8;
    cfg.epochs_stage1 = 2;
    cfg.epochs_stage2 = 2;
    return cfg;
}

StageDatasets tiny_plan() { return {{"A", "B"}, {"C"}, 2, 2}; }

// y = theta * x, a single scalar parameter.
class ScalarNet : public SegmentationNet {
public:
    explicit ScalarNet(double theta) : theta_(torch::full({1}, theta, torch::kFloat64)) {}
    torch::Tensor logits(const torch::Tensor& images) override { return theta_ * images; }
    models::NamedTensors named_parameters() override { return {{"theta", theta_}}; }
    [[nodiscard]] std::string kind() const override { return "scalar"; }
    [[nodiscard]] const models::ArchConfig& config() const override { return cfg_; }
    [[nodiscard]] std::unique_ptr<SegmentationNet> clone() override {
        return std::make_unique<ScalarNet>(theta_.item<double>());
    }

private:
    torch::Tensor theta_;
    models::ArchConfig cfg_;
};

bool same_parameters(SegmentationNet& a, SegmentationNet& b) {
    auto pa = a.named_parameters();
    auto pb = b.named_parameters();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i].first != pb[i].first || !torch::equal(pa[i].second, pb[i].second)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (Method m : {Method::UNet, Method::UNetB, Method::MAS, Method::OLKD}) {
        CHECK(method_from_name(method_name(m)) == m);
    }
    CHECK(network_kind(Method::MAS) == "unet");
    CHECK(network_kind(Method::UNetB) == "unet-b");
    CHECK_THROWS_AS(method_from_name("acs"), InvalidArgument);
}

TEST_CASE("networks produce full-resolution logits") {
    models::ArchConfig arch;
    for (const char* kind : {"unet", "unet-b"}) {
        auto net = make_segmentation_net(kind, arch, 1);
        CHECK(net->kind() == kind);
        const auto y = net->logits(torch::rand({3, 1, 32, 32}));
        CHECK(y.sizes() == torch::IntArrayRef({3, 1, 32, 32}));
        auto again = make_segmentation_net(kind, arch, 1);
        CHECK(same_parameters(*net, *again));
    }
}

TEST_CASE("unet-b uses the content encoder and segmenter names of the ACS bundle") {
    auto cfg = tiny_config();
    auto bundle = training::make_bundle(cfg, 2, 1);
    std::set<std::string> expected;
    for (const auto& [name, _] : bundle.named_parameters()) {
        if (name.rfind("E_c.", 0) == 0 || name.rfind("S.", 0) == 0) expected.insert(name);
    }
    auto net = make_segmentation_net("unet-b", cfg.arch, 1);
    std::set<std::string> got;
    for (const auto& [name, _] : net->named_parameters()) got.insert(name);
    CHECK(got == expected);
}

TEST_CASE("clone and save/load preserve the forward pass") {
    models::ArchConfig arch;
    auto net = make_segmentation_net("unet", arch, 4);
    const auto x = torch::rand({2, 1, 32, 32});
    auto copy = net->clone();
    CHECK(torch::equal(copy->logits(x), net->logits(x)));
    const auto path = acs::testing::scratch_dir("baselines_io") / "net.tar";
    save_net(*net, path);
    auto loaded = load_net(path);
    CHECK(loaded->kind() == "unet");
    CHECK(torch::equal(loaded->logits(x), net->logits(x)));
}

TEST_CASE("MAS importance of a scalar network matches the hand derivation") {
    // surrogate per sample: (theta x)^2, gradient 2 theta x^2; inputs 1 and 2 give mean |g| = 5 |theta|
    ScalarNet net(0.7);
    const auto x = torch::tensor({1.0, 2.0}, torch::kFloat64).reshape({2, 1, 1, 1});
    const auto raw = mas_raw_importance(net, x);
    CHECK(raw.values.size() == 1);
    CHECK(raw.values[0].second.item<double>() == doctest::Approx(5 * 0.7).epsilon(1e-12));
    ScalarNet neg(-0.7);
    CHECK(mas_raw_importance(neg, x).values[0].second.item<double>() == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(normalize_importance(raw).values[0].second.item<double>() == 1.0);
}

TEST_CASE("MAS importance is normalised to [0,1] and invariant to surrogate scale") {
    models::ArchConfig arch;
    auto net = make_segmentation_net("unet", arch, 2);
    torch::manual_seed(3);
    const auto x = torch::rand({4, 1, 32, 32});
    const auto imp = mas_importance(*net, x);
    CHECK(imp.min() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(imp.max() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& [_, t] : imp.values) {
        CHECK(t.min().item<double>() >= 0.0);
        CHECK(t.max().item<double>() <= 1.0);
    }
    const auto scaled = mas_importance(*net, x, 1000.0);
    double worst = 0;
    for (std::size_t k = 0; k < imp.values.size(); ++k) {
        worst = std::max(worst, (imp.values[k].second - scaled.values[k].second).abs().max().item<double>());
    }
    CHECK(worst <= 1e-6);
    // importance computation leaves the network untouched and gradient-free
    for (const auto& [_, p] : net->named_parameters()) CHECK_FALSE(p.grad().defined());
}

TEST_CASE("a parameter that cannot affect the output gets zero importance") {
    ImportanceMap raw;
    raw.values.emplace_back("dead", torch::zeros({3}, torch::kFloat64));
    raw.values.emplace_back("live", torch::tensor({1.0, 4.0}, torch::kFloat64));
    const auto n = normalize_importance(raw);
    CHECK(n.values[0].second.abs().max().item<double>() == 0.0);
    CHECK(n.values[1].second[0].item<double>() == 0.25);
    CHECK(n.values[1].second[1].item<double>() == 1.0);

    ImportanceMap zero;
    zero.values.emplace_back("w", torch::zeros({2}, torch::kFloat64));
    CHECK(normalize_importance(zero).max() == 0.0);
}

TEST_CASE("MAS penalty examples") {
    const models::NamedTensors params{{"w", torch::tensor({1.5, 2.0}, torch::kFloat64)}};
    const models::NamedTensors anchor{{"w", torch::tensor({1.0, 2.0}, torch::kFloat64)}};
    ImportanceMap imp;
    imp.values.emplace_back("w", torch::tensor({1.0, 1.0}, torch::kFloat64));
    CHECK(mas_penalty(params, anchor, imp, 1.0).item<double>() == doctest::Approx(0.25));
    CHECK(mas_penalty(params, anchor, imp, 3.0).item<double>() == doctest::Approx(0.75));
    CHECK(mas_penalty(anchor, anchor, imp, 5.0).item<double>() == 0.0);

    const models::NamedTensors renamed{{"v", torch::tensor({1.0, 2.0}, torch::kFloat64)}};
    CHECK_THROWS_AS(mas_penalty(params, renamed, imp, 1.0), InvalidArgument);
    const models::NamedTensors longer{{"w", torch::zeros({3}, torch::kFloat64)}};
    CHECK_THROWS_AS(mas_penalty(params, longer, imp, 1.0), ShapeError);
}

TEST_CASE("MAS penalty gradient matches finite differences") {
    ImportanceMap imp;
    imp.values.emplace_back("w", torch::tensor({0.2, 0.9, 0.5}, torch::kFloat64));
    const models::NamedTensors anchor{{"w", torch::tensor({0.1, -0.3, 0.4}, torch::kFloat64)}};
    const auto x = torch::tensor({0.5, 0.2, -0.1}, torch::kFloat64);
    const double err = acs::testing::gradient_error(
        [&](const torch::Tensor& w) { return mas_penalty({{"w", w}}, anchor, imp, 2.0); }, x);
    CHECK(err <= 1e-6);
}

TEST_CASE("distillation loss closed forms") {
    const auto zero = torch::zeros({1, 1, 2, 2}, torch::kFloat64);
    CHECK(kd_output_loss(zero, zero, 2.0).item<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // teacher at 0 has probability 0.5: loss = -0.5 (log p + log(1 - p)) with p = sigmoid(s / T)
    const double s = 2.0, t = 2.0;
    const double p = 1.0 / (1.0 + std::exp(-s / t));
    const double expected = -0.5 * (std::log(p) + std::log(1 - p));
    const auto student = torch::full({1, 1, 2, 2}, s, torch::kFloat64);
    CHECK(kd_output_loss(student, zero, t).item<double>() == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(kd_output_loss(zero, zero, 0.0), InvalidArgument);
    CHECK_THROWS_AS(kd_output_loss(zero, zero, -1.0), InvalidArgument);
    CHECK_THROWS_AS(kd_output_loss(zero, torch::zeros({1, 1, 2, 3}, torch::kFloat64), 1.0), ShapeError);
}

TEST_CASE("distillation loss is minimised where the student matches the teacher") {
    torch::manual_seed(9);
    const auto teacher = torch::randn({2, 1, 4, 4}, torch::kFloat64) * 2;
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        const double at_teacher = kd_output_loss(teacher, teacher, t).item<double>();
        for (int k = 0; k < 20; ++k) {
            const auto other = teacher + torch::randn_like(teacher) * 0.5;
            CHECK(kd_output_loss(other, teacher, t).item<double>() >= at_teacher - 1e-12);
        }
        auto s = teacher.clone().requires_grad_(true);
        kd_output_loss(s, teacher, t).backward();
        CHECK(s.grad().abs().max().item<double>() <= 1e-12);
    }
}

TEST_CASE("distillation gradient matches finite differences") {
    torch::manual_seed(10);
    const auto teacher = torch::randn({1, 1, 3, 3}, torch::kFloat64);
    const auto x = torch::randn({1, 1, 3, 3}, torch::kFloat64);
    CHECK(acs::testing::gradient_error([&](const torch::Tensor& s) { return kd_output_loss(s, teacher, 2.0); }, x) <=
          1e-6);
}

TEST_CASE("teacher snapshot is frozen at capture time") {
    models::ArchConfig arch;
    auto net = make_segmentation_net("unet", arch, 6);
    const auto x = torch::rand({1, 1, 32, 32});
    TeacherSnapshot teacher(*net);
    const auto before = teacher.logits(x);
    {
        torch::NoGradGuard no_grad;
        for (auto& [_, p] : net->named_parameters()) p.add_(0.1);
    }
    CHECK(torch::equal(teacher.logits(x), before));
    CHECK_FALSE(torch::equal(net->logits(x), before));
    for (const auto& [_, p] : teacher.net().named_parameters()) CHECK_FALSE(p.requires_grad());
}

TEST_CASE("baseline training is deterministic and updates every parameter in stage 2") {
    auto cfg = tiny_config();
    for (Method m : {Method::UNet, Method::UNetB}) {
        auto pool = training::build_data_pool(cfg);
        auto net = make_segmentation_net(network_kind(m), cfg.arch, 7);
        training::OptimState opt(cfg.optim, 7);
        baseline_stage1(*net, tiny_plan(), pool, cfg, opt, 7);
        const auto before = snapshot_parameters(net->named_parameters());
        const auto log = baseline_stage2(m, *net, tiny_plan(), pool, cfg, opt, 7);
        CHECK(log.steps.front().stage == 2);
        const auto after = net->named_parameters();
        for (std::size_t k = 0; k < after.size(); ++k) {
            INFO(after[k].first);
            CHECK_FALSE(torch::equal(after[k].second, before[k].second));
        }

        auto pool2 = training::build_data_pool(cfg);
        auto rerun = train_baseline(m, cfg, pool2, tiny_plan(), 7);
        CHECK(same_parameters(*rerun.net, *net));
    }
}

TEST_CASE("regularised stage 2 never reads old training data") {
    auto cfg = tiny_config();
    for (Method m : {Method::MAS, Method::OLKD}) {
        auto pool = training::build_data_pool(cfg);
        auto run = train_with_regularizer(cfg, pool, tiny_plan(), 3, m);
        bool saw_reg = false;
        for (const auto& s : run.log.steps) {
            if (s.stage == 2) saw_reg = saw_reg || s.reg != 0;
        }
        CHECK(saw_reg);
        for (const auto& a : pool.access_log()) {
            if (a.stage == 2 && a.split != training::Split::Test) CHECK(a.dataset == "C");
        }
        CHECK_THROWS_AS(pool.train("A"), training::DataReleasedError);
    }
    auto pool = training::build_data_pool(cfg);
    CHECK_THROWS_AS(train_with_regularizer(cfg, pool, tiny_plan(), 3, Method::UNet), InvalidArgument);
}

TEST_CASE("zero regulariser weight reduces MAS and OL-KD to plain fine-tuning") {
    auto cfg = tiny_config();
    cfg.mas_lambda = 0;
    cfg.kd_weight = 0;
    auto pool = training::build_data_pool(cfg);
    auto plain = train_unet(cfg, pool, tiny_plan(), 5);
    for (Method m : {Method::MAS, Method::OLKD}) {
        auto p = training::build_data_pool(cfg);
        auto run = train_with_regularizer(cfg, p, tiny_plan(), 5, m);
        CHECK(same_parameters(*run.net, *plain.net));
        REQUIRE(run.log.steps.size() == plain.log.steps.size());
        for (std::size_t i = 0; i < run.log.steps.size(); ++i) CHECK(run.log.steps[i].seg == plain.log.steps[i].seg);
        CHECK((run.log.evals == plain.log.evals));
    }
}

TEST_CASE("stage 2 validates its inputs") {
    auto cfg = tiny_config();
    auto pool = training::build_data_pool(cfg);
    auto net = make_segmentation_net("unet-b", cfg.arch, 1);
    training::OptimState opt(cfg.optim, 1);
    CHECK_THROWS_AS(baseline_stage2(Method::MAS, *net, tiny_plan(), pool, cfg, opt, 1), InvalidArgument);
    StageDatasets joint{{"A", "B", "C"}, {}, 2, 0};
    auto unet = make_segmentation_net("unet", cfg.arch, 1);
    CHECK_THROWS_AS(baseline_stage2(Method::UNet, *unet, joint, pool, cfg, opt, 1), InvalidArgument);
}
