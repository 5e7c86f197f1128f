#include <doctest.h>

#include <fstream>
#include <set>

#include "acs/models/bundle.hpp"
#include "acs/models/checkpoint.hpp"
#include "acs/models/components.hpp"
#include "acs/models/ops.hpp"
#include "support/oracles.hpp"

using namespace acs;
using namespace acs::models;

namespace {

ModelBundle make(std::int64_t n_domains = 2, std::int64_t size = 32) {
    torch::manual_seed(7);
    ArchConfig cfg;
    cfg.n_domains = n_domains;
    cfg.height = size;
    cfg.width = size;
    return ModelBundle(cfg);
}

torch::Tensor images(std::int64_t n, std::int64_t size = 32) {
    torch::manual_seed(99);
    return torch::rand({n, 1, size, size});
}

void zero(torch::nn::Module& m) {
    torch::NoGradGuard g;
    for (auto& p : m.parameters()) p.zero_();
}

}  // namespace

TEST_CASE("content encoder shapes for a 32x32 input at base width 8") {
    auto b = make();
    const auto rep = content_encode(b, images(3));
    REQUIRE(rep.skips.size() == 4);
    const std::int64_t sizes[4] = {16, 8, 4, 2};
    for (int i = 0; i < 4; ++i) {
        CHECK(rep.skips[i].size(0) == 3);
        CHECK(rep.skips[i].size(1) == 8 << i);
        CHECK(rep.skips[i].size(2) == sizes[i]);
        CHECK(rep.skips[i].size(3) == sizes[i]);
    }
    CHECK(rep.z_c.sizes() == torch::IntArrayRef({3, 128, 2, 2}));
}

TEST_CASE("content encoder rejects spatial sizes not divisible by 16") {
    auto b = make();
    try {
        content_encode(b, torch::rand({1, 1, 24, 32}));
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("height") != std::string::npos);
    }
    try {
        content_encode(b, torch::rand({1, 1, 32, 40}));
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("width") != std::string::npos);
    }
}

TEST_CASE("identical inputs in a batch give identical rows") {
    auto b = make();
    auto x = images(1).repeat({2, 1, 1, 1});
    const auto rep = content_encode(b, x);
    CHECK(torch::equal(rep.z_c[0], rep.z_c[1]));
    const auto lat = domain_encode(b, x);
    CHECK(lat.mu.size(0) == 2);
    CHECK(lat.mu[0].item<float>() == lat.mu[1].item<float>());
    CHECK(lat.log_var[0].item<float>() == lat.log_var[1].item<float>());
}

TEST_CASE("zero-initialised layers give the documented constants") {
    auto b = make();
    zero(*b.content_encoder->bottleneck);
    CHECK(content_encode(b, images(2)).z_c.abs().max().item<float>() == 0.0f);

    zero(*b.domain_encoder->mu_head);
    zero(*b.domain_encoder->log_var_head);
    const auto lat = domain_encode(b, images(4));
    CHECK(lat.mu.sizes() == torch::IntArrayRef({4}));
    CHECK(lat.mu.abs().max().item<float>() == 0.0f);
    CHECK(lat.log_var.abs().max().item<float>() == 0.0f);

    zero(*b.domain_discriminator->classifier);
    const auto code = make_domain_codes({0, 1, 1}, 2);
    const auto p = discriminate_domain(b, images(3), code);
    CHECK(p.sizes() == torch::IntArrayRef({3}));
    for (int i = 0; i < 3; ++i) CHECK(p[i].item<float>() == 0.5f);

    auto b2 = make();
    zero(*b2.segmenter->head);
    const auto seg = segment(b2, content_encode(b2, images(2)));
    CHECK(seg.sizes() == torch::IntArrayRef({2, 1, 32, 32}));
    CHECK((seg - 0.5).abs().max().item<float>() == 0.0f);
}

TEST_CASE("reparameterisation closed forms") {
    auto z = [](double mu, double lv, double noise) {
        DomainLatent l{torch::tensor({mu}, torch::kFloat64), torch::tensor({lv}, torch::kFloat64)};
        return reparam_sample(l, torch::tensor({noise}, torch::kFloat64)).item<double>();
    };
    CHECK(z(0, 0, 1.5) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(z(2, 0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(z(1, std::log(4.0), 0.5) == doctest::Approx(1.0 + 2.0 * 0.5).epsilon(1e-12));

    auto mu = torch::tensor({0.3}, torch::kFloat64).set_requires_grad(true);
    auto lv = torch::tensor({0.2}, torch::kFloat64).set_requires_grad(true);
    reparam_sample({mu, lv}, torch::tensor({0.7}, torch::kFloat64)).sum().backward();
    CHECK(mu.grad().item<double>() == doctest::Approx(1.0));
    CHECK(lv.grad().item<double>() == doctest::Approx(0.5 * std::exp(0.1) * 0.7));
}

TEST_CASE("latent scale: zero map, linearity and grid") {
    auto b = make();
    {
        torch::NoGradGuard g;
        b.latent_scale->shift.zero_();
    }
    const auto z = torch::tensor({0.0f, 0.8f, -1.1f});
    const auto f = latent_scale(b, z);
    CHECK(f.sizes() == torch::IntArrayRef({3, 16, 2, 2}));
    CHECK(f[0].abs().max().item<float>() == 0.0f);
    CHECK(torch::allclose(latent_scale(b, 2 * z), 2 * f));
    auto b64 = make(2, 64);
    CHECK(latent_scale(b64, z).size(2) == 4);
}

TEST_CASE("cbin: constant channels, zero weight and centred output") {
    const auto code = make_domain_codes({0, 1}, 2);
    const auto w = torch::randn({4, 2});
    const auto constant = torch::ones({2, 4, 5, 5}) * torch::arange(1, 5).view({1, 4, 1, 1}).to(torch::kFloat32);
    const auto out = cbin(constant, code, w);
    const auto bias = torch::tanh(code.matmul(w.t())).view({2, 4, 1, 1}).expand({2, 4, 5, 5});
    CHECK(torch::allclose(out, bias, 0, 1e-6));

    const auto x = torch::randn({2, 4, 6, 6});
    const auto plain = cbin(x, code, torch::zeros({4, 2}));
    const auto mean = x.mean({2, 3}, true);
    const auto var = (x - mean).pow(2).mean({2, 3}, true);
    CHECK(torch::allclose(plain, (x - mean) / torch::sqrt(var + 1e-5), 1e-5, 1e-5));

    const auto centred = cbin(x, code, w) - torch::tanh(code.matmul(w.t())).view({2, 4, 1, 1});
    CHECK(centred.mean({2, 3}).abs().max().item<float>() <= 1e-5);
    CHECK_THROWS(cbin(x, make_domain_codes({0, 1}, 3), w));
}

TEST_CASE("generator output shape, range and code sensitivity") {
    for (std::int64_t size : {32, 64}) {
        auto b = make(2, size);
        const auto x = images(2, size);
        const auto rep = content_encode(b, x);
        const auto f = latent_scale(b, torch::tensor({0.3f, -0.2f}));
        const auto code_a = make_domain_codes({0, 0}, 2);
        const auto code_b = make_domain_codes({1, 1}, 2);
        const auto ga = generate(b, rep.z_c, f, code_a);
        CHECK(ga.sizes() == x.sizes());
        CHECK(ga.min().item<float>() >= 0.0f);
        CHECK(ga.max().item<float>() <= 1.0f);
        CHECK(torch::equal(ga, generate(b, rep.z_c, f, code_a)));
        CHECK((ga - generate(b, rep.z_c, f, code_b)).norm().item<float>() > 0.0f);
        CHECK_THROWS(generate(b, rep.z_c, f, make_domain_codes({0, 1}, 3)));
    }
}

TEST_CASE("domain discriminator outputs strict probabilities") {
    auto b = make();
    const auto p = discriminate_domain(b, images(5), make_domain_codes({0, 1, 0, 1, 1}, 2));
    CHECK(p.sizes() == torch::IntArrayRef({5}));
    CHECK(p.min().item<float>() > 0.0f);
    CHECK(p.max().item<float>() < 1.0f);
    CHECK_THROWS(discriminate_domain(b, images(2), torch::zeros({2, 2})));
}

TEST_CASE("content discriminator: width, determinism, skip gradients") {
    for (std::int64_t n : {2, 3}) {
        auto b = make(n);
        const auto rep = content_encode(b, images(2));
        const auto logits = discriminate_content(b, rep);
        CHECK(logits.sizes() == torch::IntArrayRef({2, n + 1}));
        CHECK(torch::equal(logits, discriminate_content(b, rep)));
    }
    auto b = make();
    auto rep = content_encode(b, images(2));
    ContentRepresentation leaf;
    leaf.z_c = rep.z_c.detach().requires_grad_(true);
    for (auto& s : rep.skips) leaf.skips.push_back(s.detach().requires_grad_(true));
    discriminate_content(b, leaf).pow(2).sum().backward();
    CHECK(leaf.z_c.grad().norm().item<float>() > 0.0f);
    for (auto& s : leaf.skips) CHECK(s.grad().norm().item<float>() > 0.0f);
    ContentRepresentation short_rep{rep.z_c, {rep.skips.begin(), rep.skips.end() - 1}};
    CHECK_THROWS(discriminate_content(b, short_rep));
}

TEST_CASE("segmenter registry tail is the fine-tune set in the manifest") {
    auto b = make();
    const auto names = b.segmenter_layer_names();
    const auto tail = b.finetune_layer_names();
    REQUIRE(tail.size() == 4);
    CHECK(std::vector<std::string>(names.end() - 4, names.end()) == tail);
    const auto manifest = b.manifest();
    CHECK(manifest.at("finetune_layers").get<std::vector<std::string>>() == tail);
    CHECK(manifest.at("segmenter_layers").get<std::vector<std::string>>() == names);
    // Every tail layer is a convolution of S present in the layer registry.
    std::set<std::string> registered;
    for (const auto& l : manifest.at("layers")) registered.insert(l.at("name").get<std::string>());
    for (const auto& name : b.finetune_parameter_names()) CHECK(registered.count(name) == 1);
    CHECK(b.finetune_parameter_names().size() == 8);
}

TEST_CASE("parameter names are unique across the bundle") {
    auto b = make();
    std::set<std::string> names;
    for (const auto& [n, _] : b.named_parameters()) CHECK(names.insert(n).second);
    for (Collection c : kAllCollections) {
        for (const auto& [n, _] : b.collection_parameters(c)) {
            CHECK(n.rfind(std::string(collection_name(c)) + ".", 0) == 0);
        }
    }
}

TEST_CASE("shape contract over sizes divisible by 16") {
    for (std::int64_t size : {16, 32, 48, 64}) {
        auto b = make(2, size);
        const auto x = images(2, size);
        const auto rep = content_encode(b, x);
        CHECK(segment(b, rep).sizes() == x.sizes());
        const auto lat = domain_encode(b, x);
        const auto z = reparam_sample(lat, torch::randn({2}));
        const auto x_hat = generate(b, rep.z_c, latent_scale(b, z), make_domain_codes({0, 1}, 2));
        CHECK(x_hat.sizes() == x.sizes());
    }
}

TEST_CASE("checkpoint round-trip preserves every forward output") {
    const auto dir = testing::scratch_dir("ckpt");
    auto b = make(3);
    b.completed_stage = 1;
    b.set_trainable(Collection::Generator, false);
    save_bundle(b, dir / "m.tar");
    auto loaded = load_bundle(dir / "m.tar");
    CHECK(loaded.completed_stage == 1);
    CHECK_FALSE(loaded.trainable(Collection::Generator));
    const auto x = images(2);
    const auto code = make_domain_codes({2, 0}, 3);
    const auto ra = content_encode(b, x);
    const auto rb = content_encode(loaded, x);
    CHECK(torch::equal(ra.z_c, rb.z_c));
    CHECK(torch::equal(segment(b, ra), segment(loaded, rb)));
    CHECK(torch::equal(discriminate_content(b, ra), discriminate_content(loaded, rb)));
    CHECK(torch::equal(discriminate_domain(b, x, code), discriminate_domain(loaded, x, code)));
    const auto f = latent_scale(b, torch::tensor({0.1f, 0.4f}));
    CHECK(torch::equal(generate(b, ra.z_c, f, code), generate(loaded, rb.z_c, f, code)));
    CHECK(torch::equal(domain_encode(b, x).mu, domain_encode(loaded, x).mu));
}

TEST_CASE("checkpoint loading validates shapes and archive integrity") {
    const auto dir = testing::scratch_dir("ckpt_bad");
    auto b = make();
    save_bundle(b, dir / "m.tar");
    auto entries = read_archive(dir / "m.tar");
    auto manifest = nlohmann::json::parse(entries.at("manifest.json"));
    manifest["layers"][0]["shape"][0] = 999;
    entries["manifest.json"] = manifest.dump();
    write_archive(dir / "bad.tar", {entries.begin(), entries.end()});
    CHECK_THROWS(load_bundle(dir / "bad.tar"));

    std::ofstream(dir / "junk.tar") << "not an archive";
    CHECK_THROWS(load_bundle(dir / "junk.tar"));
}

TEST_CASE("domain codes are validated") {
    CHECK_NOTHROW(check_domain_codes(make_domain_codes({0, 1}, 2), 2));
    CHECK_THROWS(check_domain_codes(torch::ones({2, 2}), 2));
    CHECK_THROWS(make_domain_codes({2}, 2));
}
