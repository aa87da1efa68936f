#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridmtd/case_io.hpp"
#include "gridmtd/mtd.hpp"

namespace gridmtd {

enum class ExperimentKind { detection_increase, existence_probability, mst_report };
enum class AttackModel { naive, resilient };

std::vector<double> default_fraction_grid();  // 0.05, 0.10, ..., 1.00

struct ExperimentConfig {
    std::string case_path;
    std::vector<std::string> case_paths;  // mst-report
    ExperimentKind experiment = ExperimentKind::detection_increase;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    double sigma = 3.0;
    double false_alarm = 0.05;
    std::vector<double> alpha_list{0.1};
    std::vector<double> protected_fraction_grid = default_fraction_grid();
    double magnitude = 1.0;
    std::size_t attacks_per_branch = 20;
    AttackModel attack_model = AttackModel::naive;
    std::vector<std::size_t> branches;  // 1-based case branch numbers; empty = all
    WeightMode weights = WeightMode::equal;
    std::string weights_path;  // custom weights
    bool parallel = true;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Reads a JSON object whose keys mirror ExperimentConfig. Unknown keys are
/// rejected; missing keys keep their defaults.
ExperimentConfig load_experiment_config(std::string_view json_text);

struct DetectionRow {
    std::size_t branch = 0;  // 1-based case branch number
    double alpha = 0.0;
    double baseline_rate = 0.0;
    double post_mtd_rate = 0.0;
    double increase = 0.0;
};

struct DetectionReport {
    std::string case_name;
    std::vector<DetectionRow> rows;  // branch-major, alpha-minor
};

struct ExistenceRow {
    std::string case_name;
    double fraction = 0.0;
    std::size_t protected_count = 0;
    double existence_probability = 0.0;
};

struct ExistenceReport {
    std::vector<ExistenceRow> rows;
};

struct MstRow {
    std::string case_name;
    std::size_t branches_in_mst = 0;
    std::size_t total_branches = 0;
    double percentage = 0.0;
    std::optional<std::string> error;
};

/// Single-branch MTD on every selected branch: the attacker, unaware of the
/// protection, injects a = H c with c ~ magnitude * U(0,1)^n (or a resilient
/// c when attack_model = resilient). Reports detection rates without MTD
/// and with delta_b_k = alpha * b_k for each alpha.
DetectionReport run_detection_experiment(const GridCase& grid, const ExperimentConfig& cfg);
DetectionReport run_detection_experiment(const ExperimentConfig& cfg);

/// For each fraction rho, draws `trials` uniform protected subsets of
/// max(1, round(rho * l)) branches and reports how often a resilient
/// attack exists. Throws std::logic_error if the constraint system and
/// the connectivity oracle ever disagree.
ExistenceReport run_existence_experiment(const GridCase& grid, const ExperimentConfig& cfg);
ExistenceReport run_existence_experiment(const ExperimentConfig& cfg);

/// Failed cases yield a row with `error` set instead of throwing.
std::vector<MstRow> run_mst_report(const std::vector<std::string>& case_paths, WeightMode mode,
                                   const std::string& weights_path = {});
MstRow mst_row(const GridCase& grid, const WeightAssignment& weights);

void write_detection_csv(std::ostream& out, const DetectionReport& report);
void write_existence_csv(std::ostream& out, const ExistenceReport& report);
void write_mst_csv(std::ostream& out, const std::vector<MstRow>& rows);

}  // namespace gridmtd
