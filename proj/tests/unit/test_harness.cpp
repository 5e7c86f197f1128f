#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "acs/errors.hpp"
#include "acs/harness/ablation.hpp"
#include "acs/harness/experiment.hpp"
#include "acs/harness/forgetting.hpp"
#include "acs/harness/matrix.hpp"
#include "acs/harness/records.hpp"
#include "acs/harness/report.hpp"
#include "acs/harness/schedule.hpp"
#include "support/oracles.hpp"

using namespace acs;
using namespace acs::harness;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Deterministic fake scores in [0.05, 0.95].
double fake_score(const std::string& method, const std::string& schedule, std::uint64_t seed, int epoch,
                  const std::string& dataset, int salt) {
    std::uint64_t h = std::hash<std::string>{}(method + "|" + schedule + "|" + dataset);
    h ^= seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(epoch) * 1315423911ULL + salt;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 32;
    return 0.05 + 0.9 * static_cast<double>(h % 100000) / 100000.0;
}

std::vector<MetricsRecord> fake_run(const std::string& method, const std::string& schedule, std::uint64_t seed,
                                    const std::string& score_method = "") {
    const auto spec = schedule_from_name(schedule);
    std::vector<MetricsRecord> out;
    std::vector<std::pair<int, int>> points = {{1, 0}, {1, spec.switch_epoch()}};
    if (!spec.joint()) points.emplace_back(2, spec.total_epochs());
    const auto& who = score_method.empty() ? method : score_method;
    for (const auto& [stage, epoch] : points) {
        for (const char* d : {"A", "B", "C"}) {
            const double dice = fake_score(who, schedule, seed, epoch, d, 0);
            const double iou = dice / (2 - dice);
            out.push_back({method, schedule, seed, stage, epoch, d, iou, dice});
        }
    }
    return out;
}

std::vector<MetricsRecord> fake_matrix(int n_seeds) {
    std::vector<MetricsRecord> all;
    for (const char* schedule : {"AB-C", "AC-B", "BC-A", "ABC-joint"}) {
        for (const char* method : {"acs", "unet", "unet-b", "mas", "ol-kd"}) {
            for (int s = 1; s <= n_seeds; ++s) {
                auto run = fake_run(method, schedule, s);
                all.insert(all.end(), run.begin(), run.end());
            }
        }
    }
    return all;
}

}  // namespace

TEST_CASE("schedule names parse into stage sets") {
    const auto s = schedule_from_name("AB-C");
    CHECK(s.stage1_datasets == std::vector<std::string>{"A", "B"});
    CHECK(s.stage2_datasets == std::vector<std::string>{"C"});
    CHECK(s.switch_epoch() == 30);
    CHECK(s.total_epochs() == 60);
    CHECK(old_datasets(s) == std::vector<std::string>{"A", "B"});

    const auto j = schedule_from_name("ABC-joint", 10);
    CHECK(j.joint());
    CHECK(j.stage1_datasets.size() == 3);
    CHECK(j.switch_epoch() == 20);
    CHECK(old_datasets(j).empty());
    CHECK(to_stage_datasets(j).stage2.empty());
    CHECK(to_stage_datasets(j).epochs_stage1 == 20);

    CHECK(continual_schedule_names() == std::vector<std::string>{"AB-C", "AC-B", "BC-A"});
    CHECK_THROWS_AS(schedule_from_name("AB"), InvalidArgument);
    CHECK_THROWS_AS(schedule_from_name("AB-B"), InvalidArgument);
    CHECK_THROWS_AS(schedule_from_name("AA-C"), InvalidArgument);
    CHECK_THROWS_AS(schedule_from_name("-C"), InvalidArgument);
    CHECK_THROWS_AS(schedule_from_name("AB-C", 0), InvalidArgument);
}

TEST_CASE("records survive a CSV round-trip bit-exactly") {
    std::vector<MetricsRecord> rs = {{"acs", "AB-C", 3, 1, 30, "A", 0.1 + 0.2, 1.0 / 3.0},
                                     {"unet", "AB-C", 3, 2, 60, "C", 0.0, 1.0}};
    const auto csv = records_to_csv(rs);
    CHECK(csv.rfind(kMetricsHeader, 0) == 0);
    CHECK((records_from_csv(csv) == rs));
    const auto path = acs::testing::scratch_dir("records") / "records.csv";
    write_records(path, rs);
    CHECK((read_records(path) == rs));
    CHECK_THROWS_AS(records_from_csv("bad,header\n"), IoError);
    CHECK_THROWS_AS(records_from_csv(std::string(kMetricsHeader) + "\nacs,AB-C,1,1,0,A,x,0.5\n"), IoError);
}

TEST_CASE("record validation catches duplicates and out-of-range metrics") {
    std::vector<MetricsRecord> rs = {{"acs", "AB-C", 1, 1, 0, "A", 0.5, 0.5}};
    CHECK_NOTHROW(validate_records(rs));
    rs.push_back(rs.front());
    CHECK_THROWS_AS(validate_records(rs), InvalidArgument);
    CHECK_THROWS_AS(validate_records({{"acs", "AB-C", 1, 1, 0, "A", 1.5, 0.5}}), InvalidArgument);
}

TEST_CASE("forgetting arithmetic") {
    const auto e = forgetting_entry(0.8, 0.6);
    CHECK(e.absolute_drop == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(e.relative_drop == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(forgetting_entry(0.7, 0.7).absolute_drop == 0.0);
    CHECK(forgetting_entry(0.7, 0.7).relative_drop == 0.0);
    CHECK(forgetting_entry(0.5, 0.6).absolute_drop < 0);
    CHECK(std::isfinite(forgetting_entry(0.0, 0.0).relative_drop));

    CHECK(mean_std({1.0, 3.0}).mean == 2.0);
    CHECK(mean_std({1.0, 3.0}).std == 1.0);
    CHECK(mean_std({}).n == 0);
}

TEST_CASE("forgetting report over runs") {
    std::vector<MetricsRecord> rs;
    for (std::uint64_t seed : {1, 2}) {
        const double base = seed == 1 ? 0.8 : 0.6;
        for (const char* d : {"A", "B", "C"}) {
            rs.push_back({"unet", "AB-C", seed, 1, 30, d, 0.5, base});
            rs.push_back({"unet", "AB-C", seed, 2, 60, d, 0.4, base - 0.2});
        }
    }
    const auto rep = compute_forgetting(rs);
    const auto& a = rep.row("unet", "AB-C", "A");
    CHECK(a.absolute_drop.mean == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(a.absolute_drop.std == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.relative_drop.mean == doctest::Approx((0.25 + 1.0 / 3.0) / 2).epsilon(1e-12));
    CHECK(a.dice_at_switch.mean == doctest::Approx(0.7));
    CHECK(a.dice_at_switch.n == 2);
    const auto& old = rep.row("unet", "AB-C", kOldAverage);
    CHECK(old.absolute_drop.mean == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(rep.row("acs", "AB-C", "A"), InvalidArgument);

    rs.pop_back();
    CHECK_THROWS_AS(compute_forgetting(rs), InvalidArgument);
}

TEST_CASE("ablation variants are named and parsed consistently") {
    const auto rows = ablation_toggles();
    REQUIRE(rows.size() == 5);
    std::set<std::string> names;
    for (const auto& t : rows) {
        const auto name = ablation_method(t);
        names.insert(name);
        training::LossToggles back;
        REQUIRE(parse_ablation_method(name, back));
        CHECK(back.adv_c == t.adv_c);
        CHECK(back.vae == t.vae);
        CHECK(back.gan == t.gan);
        CHECK(back.lr == t.lr);
        CHECK_NOTHROW(check_method(name));
    }
    CHECK(names.size() == 5);
    CHECK(ablation_method(rows.back()) == "acs");
    CHECK(ablation_method(rows.front()) == "acs:0111");
    training::LossToggles t;
    CHECK_FALSE(parse_ablation_method("unet", t));
    CHECK_FALSE(parse_ablation_method("acs:01", t));
    CHECK_FALSE(parse_ablation_method("acs:0121", t));
    CHECK_THROWS(check_method("acs:9999"));
}

TEST_CASE("ablation table shape and averages") {
    std::vector<MetricsRecord> rs;
    for (const auto& t : ablation_toggles()) {
        for (const auto& s : continual_schedule_names()) {
            auto run = fake_run(ablation_method(t), s, 1);
            rs.insert(rs.end(), run.begin(), run.end());
        }
    }
    const auto table = ablation_table(rs, continual_schedule_names());
    REQUIRE(table.rows.size() == 5);
    for (const auto& row : table.rows) {
        CHECK(row.per_schedule.size() == 3);
        double sum = 0;
        for (const auto& s : table.schedules) {
            const auto final_rows = fake_run(row.method, s, 1);
            double mean = 0;
            for (const auto& r : final_rows) {
                if (r.epoch == 60) mean += r.dice / 3;
            }
            CHECK(row.per_schedule.at(s).dice == doctest::Approx(mean).epsilon(1e-12));
            sum += mean;
        }
        CHECK(row.average.dice == doctest::Approx(sum / 3).epsilon(1e-12));
    }
}

TEST_CASE("report tables have one row per method and a fixed header") {
    const auto rs = fake_matrix(2);
    const auto block = table_block(rs, "AB-C", 60, false);
    CHECK(block.rows.size() == 5);
    for (const auto& row : block.rows) {
        CHECK(row.datasets == std::vector<std::string>{"A", "B", "C"});
        double avg = 0;
        for (const auto& d : row.dice) avg += d.mean / 3;
        CHECK(row.average_dice == doctest::Approx(avg).epsilon(1e-12));
    }
    const auto md = tables_markdown(rs, std::nullopt);
    CHECK(md.find("| Method | Dataset A | Dataset B | Dataset C | Average |") != std::string::npos);
    CHECK(md.find("## Final scores") != std::string::npos);
}

TEST_CASE("identical baselines merge at the switch") {
    std::vector<MetricsRecord> rs;
    for (const char* m : {"unet", "mas", "ol-kd"}) {
        for (std::uint64_t s : {1, 2}) {
            for (auto r : fake_run(m, "AB-C", s, "unet")) {
                if (r.stage == 2 && std::string(m) != "unet") r.dice = std::max(0.0, r.dice - 0.01);
                rs.push_back(r);
            }
        }
    }
    const auto merged = table_block(rs, "AB-C", 30, true);
    REQUIRE(merged.rows.size() == 1);
    CHECK(merged.rows[0].methods.size() == 3);
    CHECK(merged.rows[0].label.rfind("Baselines (", 0) == 0);
    CHECK(table_block(rs, "AB-C", 60, true).rows.size() == 2);
}

TEST_CASE("emitted report is reproducible and consistent with metrics.csv") {
    const auto rs = fake_matrix(2);
    const auto dir1 = acs::testing::scratch_dir("report1");
    const auto dir2 = acs::testing::scratch_dir("report2");
    emit_report(rs, dir1);
    auto shuffled = rs;
    std::reverse(shuffled.begin(), shuffled.end());
    emit_report(shuffled, dir2);
    for (const char* f : {"metrics.csv", "summary.json", "tables.md", "plots/AB-C_acs.svg"}) {
        INFO(f);
        CHECK(read_file(dir1 / f) == read_file(dir2 / f));
    }
    CHECK(std::filesystem::exists(dir1 / "plots" / "ABC-joint_unet-b.svg"));

    // recompute one summary cell from metrics.csv
    const auto back = read_records(dir1 / "metrics.csv");
    CHECK(back.size() == rs.size());
    const auto summary = nlohmann::json::parse(read_file(dir1 / "summary.json"));
    CHECK(summary["format_version"] == kSummaryFormatVersion);
    CHECK(summary["n_records"] == rs.size());
    double mean = 0;
    for (const auto& r : back) {
        if (r.method == "mas" && r.schedule == "AC-B" && r.epoch == 60 && r.dataset == "B") mean += r.dice / 2;
    }
    bool found = false;
    for (const auto& block : summary["tables"]["final"]) {
        if (block["schedule"] != "AC-B") continue;
        for (const auto& row : block["rows"]) {
            if (row["label"] != "mas") continue;
            CHECK(row["datasets"]["B"]["dice"]["mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
            found = true;
        }
    }
    CHECK(found);
    CHECK(summary["forgetting"].is_array());
    CHECK(summary["ablation"].is_null());
}

TEST_CASE("rankings need enough seeds") {
    const auto few = summary_json(fake_matrix(2), std::nullopt, std::nullopt);
    CHECK(few["ranking"]["AB-C"]["available"] == false);
    CHECK(few["ranking"]["AB-C"]["order"].is_null());
    const auto many = summary_json(fake_matrix(kMinRankingSeeds), std::nullopt, std::nullopt);
    const auto& order = many["ranking"]["AB-C"]["order"];
    REQUIRE(order.is_array());
    CHECK(order.size() == 5);
    for (std::size_t i = 1; i < order.size(); ++i) {
        CHECK(order[i - 1]["final_dice"]["mean"].get<double>() >= order[i]["final_dice"]["mean"].get<double>());
    }
}

TEST_CASE("deltas against each baseline") {
    std::vector<MetricsRecord> rs;
    for (std::uint64_t s : {1, 2}) {
        for (const char* d : {"A", "B", "C"}) {
            rs.push_back({"acs", "AB-C", s, 1, 30, d, 0.5, 0.7});
            rs.push_back({"acs", "AB-C", s, 2, 60, d, 0.5, 0.6});
            rs.push_back({"unet", "AB-C", s, 1, 30, d, 0.4, 0.8});
            rs.push_back({"unet", "AB-C", s, 2, 60, d, 0.3, 0.5});
        }
    }
    const auto deltas = compute_deltas(rs, "acs");
    REQUIRE(deltas.size() == 2);
    for (const auto& d : deltas) {
        CHECK(d.versus == "unet");
        if (d.epoch == "switch") {
            CHECK(d.dice.mean == doctest::Approx(-0.1).epsilon(1e-12));
            CHECK(d.iou.mean == doctest::Approx(0.1).epsilon(1e-12));
        } else {
            CHECK(d.dice.mean == doctest::Approx(0.1).epsilon(1e-12));
            CHECK(d.iou.mean == doctest::Approx(0.2).epsilon(1e-12));
        }
        CHECK(d.dice.std == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("matrix files") {
    const auto j = nlohmann::json::parse(R"({"config": {"data.n_subjects": 12, "train.batch_size": 4},
        "schedules": ["AB-C"], "methods": ["acs", "unet"], "seeds": [7], "epochs_per_stage": 3, "ablation": true})");
    const auto m = matrix_from_json(j);
    CHECK(m.config.data.n_subjects == 12);
    CHECK(m.config.batch_size == 4);
    CHECK(m.schedules == std::vector<std::string>{"AB-C"});
    CHECK(m.seeds == std::vector<std::uint64_t>{7});
    CHECK(m.epochs_per_stage == 3);
    CHECK(m.ablation);
    CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse(R"({"sedes": [1]})")), ConfigError);
    CHECK_THROWS(matrix_from_json(nlohmann::json::parse(R"({"methods": ["svm"]})")));
    CHECK(first_seeds(3) == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(run_directory("out", "AB-C", "acs", 2) == std::filesystem::path("out/runs/AB-C/acs/seed2"));
}

TEST_CASE("eval epochs") {
    const auto s = schedule_from_name("AB-C");
    std::vector<int> epochs;
    for (int e = 0; e <= 60; ++e) {
        if (is_eval_epoch(e, 7, s)) epochs.push_back(e);
    }
    CHECK(epochs == std::vector<int>{0, 7, 14, 21, 28, 30, 35, 42, 49, 56, 60});
}

TEST_CASE("experiment runs record every dataset at the switch and the end") {
    training::TrainConfig cfg;
    cfg.data.n_subjects = 10;
    cfg.data.slices_per_subject = 2;
    cfg.batch_size = 8;
    cfg.eval_every = 100;
    const auto cont = schedule_from_name("AB-C", 2);
    const auto dir = acs::testing::scratch_dir("experiment");
    for (const char* method : {"acs", "unet-b", "mas"}) {
        const auto rs = run_experiment(cont, method, cfg, 1, {dir / method});
        std::set<std::tuple<int, int, std::string>> keys;
        for (const auto& r : rs) keys.insert({r.stage, r.epoch, r.dataset});
        std::set<std::tuple<int, int, std::string>> expected;
        for (const char* d : {"A", "B", "C"}) {
            expected.insert({1, 0, d});
            expected.insert({1, 2, d});
            expected.insert({2, 4, d});
        }
        CHECK((keys == expected));
        CHECK((read_records(dir / method / "records.csv") == rs));
        CHECK(std::filesystem::exists(dir / method / "final.tar"));
    }
    const auto joint = run_experiment(schedule_from_name("ABC-joint", 2), "unet", cfg, 1);
    for (const auto& r : joint) CHECK(r.stage == 1);
    CHECK(joint.size() == 6);

    const auto shared = run_shared_baselines(cont, {"unet", "mas", "ol-kd"}, cfg, 1);
    for (const auto& [m, rs] : shared) {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            if (rs[i].stage == 1) {
                CHECK(rs[i].dice == shared.at("unet")[i].dice);
                CHECK(rs[i].iou == shared.at("unet")[i].iou);
            }
        }
    }
    CHECK_THROWS_AS(run_experiment(cont, "svm", cfg, 1), InvalidArgument);
}
