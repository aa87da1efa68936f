#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "gridmtd/experiments.hpp"
#include "test_support.hpp"

using namespace gridmtd;

namespace {

ExperimentConfig detection_config() {
    ExperimentConfig cfg;
    cfg.case_path = test::case_path("case14.m");
    cfg.trials = 400;
    cfg.attacks_per_branch = 5;
    cfg.branches = {1, 4, 10, 20};
    return cfg;
}

template <typename Report, typename Writer>
std::string to_csv(const Report& report, Writer write) {
    std::ostringstream out;
    write(out, report);
    return out.str();
}

double mean_increase(const DetectionReport& report) {
    double sum = 0.0;
    for (const auto& r : report.rows) sum += r.increase;
    return sum / static_cast<double>(report.rows.size());
}

}  // namespace

TEST_CASE("detection report shape and invariants") {
    auto cfg = detection_config();
    cfg.alpha_list = {0.1, 0.5};
    const auto report = run_detection_experiment(cfg);
    CHECK(report.case_name == "case14");
    REQUIRE(report.rows.size() == 8);
    CHECK(report.rows[0].branch == 1);
    CHECK(report.rows[1].alpha == 0.5);
    CHECK(report.rows[7].branch == 20);
    for (const auto& r : report.rows) {
        CHECK(r.baseline_rate >= 0.0);
        CHECK(r.baseline_rate <= 1.0);
        CHECK(r.post_mtd_rate >= 0.0);
        CHECK(r.post_mtd_rate <= 1.0);
        CHECK(r.increase == r.post_mtd_rate - r.baseline_rate);
        // Stealthy without MTD: the baseline sits at the false alarm rate.
        CHECK(std::abs(r.baseline_rate - 0.05) < 0.02);
    }
}

TEST_CASE("zero admittance change gives no increase") {
    auto cfg = detection_config();
    cfg.alpha_list = {0.0};
    for (const auto& r : run_detection_experiment(cfg).rows) CHECK(std::abs(r.increase) < 1e-12);
}

TEST_CASE("resilient attacks gain nothing from single-branch MTD") {
    auto cfg = detection_config();
    cfg.attack_model = AttackModel::resilient;
    cfg.alpha_list = {0.1, 1.0, -0.5, 10.0};
    cfg.magnitude = 20.0;
    for (const auto& r : run_detection_experiment(cfg).rows) {
        CAPTURE(r.branch);
        CHECK(std::abs(r.increase) <= 0.02);
    }
}

TEST_CASE("increase grows with attack magnitude") {
    auto cfg = detection_config();
    cfg.alpha_list = {0.5};
    cfg.trials = 300;
    double previous = -1.0;
    for (double magnitude : {1.0, 20.0, 80.0}) {
        cfg.magnitude = magnitude;
        const double mean = mean_increase(run_detection_experiment(cfg));
        CAPTURE(magnitude);
        CHECK(mean >= previous - 0.01);
        previous = mean;
    }
    CHECK(previous > 0.05);
}

TEST_CASE("detection results do not depend on the kernel") {
    auto cfg = detection_config();
    cfg.trials = 150;
    cfg.parallel = true;
    const auto parallel = to_csv(run_detection_experiment(cfg), write_detection_csv);
    cfg.parallel = false;
    const auto serial = to_csv(run_detection_experiment(cfg), write_detection_csv);
    CHECK(parallel == serial);
    CHECK(parallel == to_csv(run_detection_experiment(cfg), write_detection_csv));
    cfg.seed = 2;
    CHECK(parallel != to_csv(run_detection_experiment(cfg), write_detection_csv));
}

TEST_CASE("detection CSV format") {
    auto cfg = detection_config();
    cfg.branches = {3};
    cfg.trials = 10;
    const auto csv = to_csv(run_detection_experiment(cfg), write_detection_csv);
    CHECK(csv.rfind("branch,alpha,baseline_rate,post_mtd_rate,increase\n3,0.1,", 0) == 0);
}

TEST_CASE("existence probability") {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::existence_probability;
    cfg.case_path = test::case_path("case30.m");
    cfg.trials = 300;
    cfg.protected_fraction_grid = {0.1, 0.4, 0.7, 1.0};
    const auto report = run_existence_experiment(cfg);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].protected_count == 4);
    CHECK(report.rows[1].protected_count == 16);
    CHECK(report.rows[3].protected_count == 41);
    CHECK(report.rows[0].existence_probability == 1.0);
    CHECK(report.rows[1].existence_probability == 1.0);
    CHECK(report.rows[3].existence_probability == 0.0);
    CHECK(report.rows[2].existence_probability <= 1.0);

    const auto csv = to_csv(report, write_existence_csv);
    CHECK(csv.rfind("case,fraction,protected_count,existence_probability\ncase30,0.1,4,1\n", 0) == 0);

    cfg.parallel = false;
    CHECK(to_csv(run_existence_experiment(cfg), write_existence_csv) == csv);
}

TEST_CASE("too few protected branches cannot span the buses") {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::existence_probability;
    cfg.trials = 100;
    cfg.protected_fraction_grid = {0.01, 0.3, 0.6};  // 1, 6 and 12 of 20 branches on case14
    const auto report = run_existence_experiment(test::load("case14.m"), cfg);
    CHECK(report.rows[0].protected_count == 1);
    for (const auto& r : report.rows) CHECK(r.existence_probability == 1.0);
}

TEST_CASE("config loading") {
    const auto cfg = load_experiment_config(R"({"experiment":"existence-probability","case_path":"x.m",
        "trials":50,"seed":7,"protected_fraction_grid":[0.5,1.0],"weights":"custom:w.json"})");
    CHECK(cfg.experiment == ExperimentKind::existence_probability);
    CHECK(cfg.trials == 50);
    CHECK(cfg.seed == 7);
    CHECK(cfg.sigma == 3.0);
    CHECK(cfg.false_alarm == 0.05);
    CHECK(cfg.weights == WeightMode::custom);
    CHECK(cfg.weights_path == "w.json");

    CHECK(ExperimentConfig{}.protected_fraction_grid.size() == 20);
    CHECK(ExperimentConfig{}.protected_fraction_grid.back() == 1.0);

    CHECK_THROWS_WITH_AS(load_experiment_config(R"({"trials":0})"), doctest::Contains("'trials'"), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(R"({"trails":10})"), doctest::Contains("'trails'"), ValidationError);
    CHECK_THROWS_WITH_AS(load_experiment_config(R"({"sigma":"big"})"), doctest::Contains("'sigma'"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"protected_fraction_grid":[0.0]})"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"protected_fraction_grid":[1.5]})"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"experiment":"existence-probability","protected_fraction_grid":[]})"),
                    ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"experiment":"plot"})"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"false_alarm":1.0})"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"alpha_list":[-1]})"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config(R"({"weights":"heavy"})"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config("[1,2]"), ValidationError);
    CHECK_THROWS_AS(load_experiment_config("{"), ValidationError);
}

TEST_CASE("unknown branch number in config") {
    auto cfg = detection_config();
    cfg.branches = {21};
    CHECK_THROWS_AS(run_detection_experiment(cfg), ValidationError);
}

TEST_CASE("MST report") {
    SUBCASE("toy") {
        const auto rows = run_mst_report({test::case_path("toy3.json")}, WeightMode::equal);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].branches_in_mst == 2);
        CHECK(rows[0].total_branches == 3);
        CHECK(rows[0].percentage == doctest::Approx(0.667).epsilon(0.001));
        CHECK(to_csv(rows, write_mst_csv) == "case,branches_in_mst,total_branches,percentage\ntoy3,2,3,0.666667\n");
    }
    SUBCASE("failing cases become error rows") {
        const auto dir = std::filesystem::temp_directory_path() / "gridmtd_test_mst";
        std::filesystem::create_directories(dir);
        const auto broken = dir / "split.json";
        std::ofstream(broken) << R"({"name":"split","base_mva":100,"reference_bus":1,"buses":[1,2,3,4],
            "branches":[{"from":1,"to":2,"x":0.1,"status":1},{"from":3,"to":4,"x":0.1,"status":1}]})";
        const auto rows = run_mst_report({broken.string(), test::case_path("case14.m"), (dir / "absent.m").string()},
                                         WeightMode::admittance_proportional);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].error.has_value());
        CHECK(rows[1].branches_in_mst == 13);
        CHECK(rows[2].error.has_value());
        const auto csv = to_csv(rows, write_mst_csv);
        CHECK(csv.find("split,error,,\n") != std::string::npos);
        CHECK(csv.find("case14,13,20,0.65\n") != std::string::npos);
    }
}
