#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <set>

#include "acs/data/batching.hpp"
#include "acs/data/io.hpp"
#include "acs/data/resample.hpp"
#include "acs/data/split.hpp"
#include "acs/data/synthetic.hpp"
#include "support/oracles.hpp"

using namespace acs;
using namespace acs::data;

namespace {

DomainSpec noisy_spec() { return {0.8, 0.1, 0.05, 0.1, 4.0, 0.5}; }

Dataset small_dataset(int subjects = 12, int slices = 3, std::uint64_t seed = 5) {
    return generate_synthetic_domain(noisy_spec(), subjects, slices, {32, 32}, seed, "X", 1);
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

}  // namespace

TEST_CASE("identity domain spec reproduces the clean rendering") {
    const DomainSpec identity{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
    const auto ds = generate_synthetic_domain(identity, 3, 4, {32, 32}, 11);
    for (const auto& slice : ds.slices) {
        const auto anatomy = sample_anatomy(11, slice.subject_id);
        const int k = static_cast<int>(&slice - ds.slices.data()) % 4;
        const auto clean = render_content(anatomy, k, 4, {32, 32});
        for (std::size_t i = 0; i < clean.image.size(); ++i) {
            CHECK(slice.image.values[i] == static_cast<float>(clean.image.values[i]));
        }
        CHECK(slice.mask == clean.mask);
    }
}

TEST_CASE("generation is deterministic") {
    CHECK(small_dataset() == small_dataset());
    CHECK_FALSE(small_dataset(12, 3, 5) == small_dataset(12, 3, 6));
}

TEST_CASE("an intensity offset shifts every unclipped pixel by exactly that amount") {
    const auto anatomy = sample_anatomy(3, 0);
    const auto clean = render_content(anatomy, 1, 3, {32, 32});
    auto a = noisy_spec();
    auto b = a;
    b.intensity_offset += 0.2;
    const auto ia = apply_domain_unclipped(clean.image, a, 3, 0, 1);
    const auto ib = apply_domain_unclipped(clean.image, b, 3, 0, 1);
    double mean = 0;
    for (std::size_t i = 0; i < ia.size(); ++i) mean += ib.values[i] - ia.values[i];
    mean /= static_cast<double>(ia.size());
    CHECK(std::abs(mean - 0.2) <= 1e-6);
}

TEST_CASE("masks do not depend on the domain spec") {
    const auto a = generate_synthetic_domain({1, 0, 0, 0, 1, 0}, 4, 3, {32, 32}, 9);
    const auto b = generate_synthetic_domain({-0.9, 0.95, 0.1, 0.3, 7, 1.0}, 4, 3, {32, 32}, 9);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.slices[i].mask == b.slices[i].mask);
}

TEST_CASE("generated slices satisfy the slice invariants and contain foreground") {
    const auto ds = small_dataset();
    std::size_t fg = 0, total = 0;
    for (const auto& s : ds.slices) {
        CHECK_NOTHROW(validate_slice(s));
        for (auto m : s.mask.values) fg += m;
        total += s.mask.size();
    }
    const double frac = static_cast<double>(fg) / static_cast<double>(total);
    CHECK(frac > 0.01);
    CHECK(frac < 0.2);
}

TEST_CASE("invalid domain specs are rejected") {
    CHECK_THROWS_AS(generate_synthetic_domain({1, 0, -1, 0, 1, 0}, 2, 2, {32, 32}, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_synthetic_domain({1, 0, 0, 0, 1, 1.5}, 2, 2, {32, 32}, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_synthetic_domain(noisy_spec(), 0, 2, {32, 32}, 1), InvalidArgument);
}

TEST_CASE("split sizes follow the 70/20/10 rule") {
    CHECK(split_counts(10, {}) == std::array<int, 3>{7, 2, 1});
    // Independent enumeration for n = 14: every allowed size triple is within
    // one subject of (9.8, 2.8, 1.4).
    const auto c = split_counts(14, {});
    const std::set<std::array<int, 3>> allowed = {{10, 3, 1}, {10, 2, 2}, {9, 3, 2}};
    CHECK(allowed.count(c) == 1);
    CHECK(c[0] + c[1] + c[2] == 14);
    const double ideal[3] = {9.8, 2.8, 1.4};
    for (int i = 0; i < 3; ++i) CHECK(std::abs(c[i] - ideal[i]) <= 1.0);
    for (int n = 10; n <= 60; ++n) {
        const auto k = split_counts(n, {});
        CHECK(k[0] + k[1] + k[2] == n);
        CHECK(std::abs(k[0] - 0.7 * n) <= 1.0);
        CHECK(std::abs(k[1] - 0.2 * n) <= 1.0);
        CHECK(std::abs(k[2] - 0.1 * n) <= 1.0);
        CHECK(k[2] >= 1);
    }
    CHECK_THROWS_AS(split_counts(9, {}), InvalidArgument);
}

TEST_CASE("splits are subject-disjoint, complete and deterministic") {
    const auto ds = small_dataset(20, 2);
    SplitSpec spec;
    spec.seed = 4;
    const auto a = split_dataset(ds, spec);
    const auto b = split_dataset(ds, spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.val == b.val);
    std::set<int> tr, te, va;
    for (int s : a.train.subject_ids()) tr.insert(s);
    for (int s : a.test.subject_ids()) te.insert(s);
    for (int s : a.val.subject_ids()) va.insert(s);
    for (int s : tr) {
        CHECK(te.count(s) == 0);
        CHECK(va.count(s) == 0);
    }
    for (int s : te) CHECK(va.count(s) == 0);
    CHECK(tr.size() + te.size() + va.size() == 20);
    CHECK(a.train.size() + a.test.size() + a.val.size() == ds.size());
    CHECK_THROWS_AS(split_dataset(small_dataset(9, 1), spec), InvalidArgument);
}

TEST_CASE("bilinear resampling: hand-evaluated corner-aligned case") {
    Image img(2, 2);
    img.values = {0, 1, 0, 1};
    const auto out = resample_bilinear(img, {2, 4});
    const float expected[4] = {0.0f, 1.0f / 3.0f, 2.0f / 3.0f, 1.0f};
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) CHECK(std::abs(out.at(r, c) - expected[c]) <= 1e-6);
    }
}

TEST_CASE("bilinear resampling: constants, identity, range and linearity") {
    Image constant(2, 2, 0.7f);
    for (auto [h, w] : {std::pair{1, 1}, {5, 3}, {32, 32}}) {
        for (float v : resample_bilinear(constant, {h, w}).values) CHECK(v == doctest::Approx(0.7f));
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(0, 1);
    Image x(7, 5);
    for (auto& v : x.values) v = u(rng);
    CHECK(resample_bilinear(x, {7, 5}) == x);

    const auto y = resample_bilinear(x, {13, 11});
    const auto [lo, hi] = std::minmax_element(x.values.begin(), x.values.end());
    for (float v : y.values) {
        CHECK(v >= *lo - 1e-6f);
        CHECK(v <= *hi + 1e-6f);
    }
    Image affine = x;
    for (auto& v : affine.values) v = 0.5f * v + 0.25f;
    const auto ya = resample_bilinear(affine, {13, 11});
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(ya.values[i] - (0.5f * y.values[i] + 0.25f)) <= 1e-6);
}

TEST_CASE("bilinear resampling matches two reference resamplers") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> dim(1, 12);
    std::uniform_real_distribution<float> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        Image src(dim(rng), dim(rng));
        for (auto& v : src.values) v = u(rng);
        const Shape target{dim(rng) + 1, dim(rng) + 1};
        const auto got = resample_bilinear(src, target);
        const auto ref = testing::reference_bilinear(src, target);
        auto t = torch::from_blob(src.values.data(), {1, 1, src.height, src.width}, torch::kFloat32).to(torch::kFloat64);
        auto tref = torch::nn::functional::interpolate(
            t, torch::nn::functional::InterpolateFuncOptions()
                   .size(std::vector<std::int64_t>{target.height, target.width})
                   .mode(torch::kBilinear)
                   .align_corners(true));
        const auto acc = tref.contiguous();
        for (std::int64_t i = 0; i < target.height * target.width; ++i) {
            CHECK(std::abs(got.values[i] - ref.values[i]) <= 1e-6);
            CHECK(std::abs(got.values[i] - acc.data_ptr<double>()[i]) <= 1e-6);
        }
    }
}

TEST_CASE("nearest resampling keeps masks binary and conform_dataset fixes shapes") {
    Mask m(3, 3);
    m.values = {0, 1, 0, 1, 1, 1, 0, 1, 0};
    const auto up = resample_nearest(m, {8, 8});
    for (auto v : up.values) CHECK((v == 0 || v == 1));
    CHECK(resample_nearest(m, {3, 3}) == m);
    auto ds = small_dataset(10, 1);
    const auto conformed = conform_dataset(ds, {16, 16});
    for (const auto& s : conformed.slices) {
        CHECK(s.image.shape() == Shape{16, 16});
        CHECK(s.mask.shape() == Shape{16, 16});
    }
}

TEST_CASE("make_batches covers every slice once with a pure shuffle") {
    const auto batches = make_batches(100, 40, 1, 0);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 40);
    CHECK(batches[1].size() == 40);
    CHECK(batches[2].size() == 20);
    std::vector<std::size_t> all;
    for (const auto& b : batches) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);

    const auto one = make_batches(100, 100, 1, 0);
    CHECK(one.size() == 1);
    CHECK(one[0].size() == 100);
    CHECK(make_batches(100, 40, 1, 0) == batches);
    CHECK_FALSE(make_batches(100, 40, 1, 1) == batches);
    CHECK_THROWS(make_batches(0, 4, 1, 0));
    CHECK_THROWS(make_batches(10, 0, 1, 0));
}

TEST_CASE("dataset round-trip is bit-exact") {
    const auto dir = testing::scratch_dir("roundtrip");
    const auto ds = small_dataset(10, 2);
    save_dataset(ds, dir / "X");
    CHECK(load_dataset(dir / "X") == ds);
    CHECK(std::filesystem::exists(dir / "X" / "meta.json"));
}

TEST_CASE("dataset loading reports each format fault distinctly") {
    const auto dir = testing::scratch_dir("faults");
    const auto ds = small_dataset(10, 1);
    save_dataset(ds, dir / "ok");
    const auto data = read_bytes(dir / "ok" / "data.bin");
    const auto meta = nlohmann::json::parse(read_bytes(dir / "ok" / "meta.json"));
    const std::size_t per_slice = 32 * 32 * 5;

    auto variant = [&](const std::string& name, const std::string& bin, const nlohmann::json& m) {
        std::filesystem::create_directories(dir / name);
        write_bytes(dir / name / "data.bin", bin);
        write_bytes(dir / name / "meta.json", m.dump());
        return dir / name;
    };

    // Header declaring 3 slices but the file holding 2.
    Dataset three = ds;
    three.slices.resize(3);
    save_dataset(three, dir / "three");
    auto truncated_bin = read_bytes(dir / "three" / "data.bin");
    truncated_bin.resize(truncated_bin.size() - per_slice);
    write_bytes(dir / "three" / "data.bin", truncated_bin);
    CHECK_THROWS_AS(load_dataset(dir / "three"), TruncationError);

    auto flipped = data;
    std::reverse(flipped.begin() + 4, flipped.begin() + 8);
    CHECK_THROWS_AS(load_dataset(variant("endian", flipped, meta)), EndiannessError);
    auto be_meta = meta;
    be_meta["dtype"] = "f32be";
    CHECK_THROWS_AS(load_dataset(variant("endian_meta", data, be_meta)), EndiannessError);

    auto corrupted = data;
    corrupted[100] = static_cast<char>(corrupted[100] ^ 0x40);
    CHECK_THROWS_AS(load_dataset(variant("crc", corrupted, meta)), ChecksumError);

    auto no_key = meta;
    no_key.erase("height");
    CHECK_THROWS_AS(load_dataset(variant("header", data, no_key)), HeaderError);

    auto ids = meta;
    ids["subject_ids"].erase(ids["subject_ids"].size() - 1);
    CHECK_THROWS_AS(load_dataset(variant("ids", data, ids)), HeaderError);

    Dataset bad = ds;
    bad.slices[0].mask = Mask(16, 16);
    CHECK_THROWS_AS(save_dataset(bad, dir / "bad"), ShapeMismatchError);
}
