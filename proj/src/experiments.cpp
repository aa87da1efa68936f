#include "gridmtd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gridmtd/attack.hpp"
#include "gridmtd/csv.hpp"
#include "gridmtd/estimation.hpp"
#include "gridmtd/grid_model.hpp"
#include "gridmtd/rng.hpp"
#include "gridmtd/trial_kernels.hpp"
#include "json.hpp"

namespace gridmtd {

std::vector<double> default_fraction_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(i / 20.0);
    return grid;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ValidationError("config: field 'trials' must be at least 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("config: field 'sigma' must be positive");
    if (!(false_alarm > 0.0 && false_alarm < 1.0)) throw ValidationError("config: field 'false_alarm' must lie in (0, 1)");
    if (!(magnitude > 0.0) || !std::isfinite(magnitude))
        throw ValidationError("config: field 'magnitude' must be positive");
    if (attacks_per_branch < 1) throw ValidationError("config: field 'attacks_per_branch' must be at least 1");
    for (double a : alpha_list)
        if (!std::isfinite(a) || a == -1.0)
            throw ValidationError("config: field 'alpha_list' entries must be finite and not -1");
    for (double f : protected_fraction_grid)
        if (!(f > 0.0 && f <= 1.0)) throw ValidationError("config: field 'protected_fraction_grid' entries must lie in (0, 1]");
    for (auto b : branches)
        if (b < 1) throw ValidationError("config: field 'branches' holds 1-based branch numbers");

    switch (experiment) {
        case ExperimentKind::detection_increase:
            if (alpha_list.empty()) throw ValidationError("config: field 'alpha_list' must not be empty");
            break;
        case ExperimentKind::existence_probability:
            if (protected_fraction_grid.empty())
                throw ValidationError("config: field 'protected_fraction_grid' must not be empty");
            break;
        case ExperimentKind::mst_report:
            if (case_paths.empty() && case_path.empty()) throw ValidationError("config: field 'case_paths' must not be empty");
            break;
    }
    if (weights == WeightMode::custom && weights_path.empty())
        throw ValidationError("config: field 'weights' custom mode needs a path");
}

namespace {

using nlohmann::json;

template <typename T>
T field(const json& doc, const std::string& key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: field '" + key + "' has the wrong type");
    }
}

ExperimentKind parse_kind(const std::string& s) {
    if (s == "detection-increase") return ExperimentKind::detection_increase;
    if (s == "existence-probability") return ExperimentKind::existence_probability;
    if (s == "mst-report") return ExperimentKind::mst_report;
    throw ValidationError("config: field 'experiment' must be detection-increase, existence-probability or mst-report");
}

}  // namespace

ExperimentConfig load_experiment_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config: expected a JSON object");

    ExperimentConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "case_path") cfg.case_path = field<std::string>(doc, key);
        else if (key == "case_paths") cfg.case_paths = field<std::vector<std::string>>(doc, key);
        else if (key == "experiment") cfg.experiment = parse_kind(field<std::string>(doc, key));
        else if (key == "trials") {
            const auto t = field<long long>(doc, key);
            if (t < 1) throw ValidationError("config: field 'trials' must be at least 1");
            cfg.trials = static_cast<std::size_t>(t);
        } else if (key == "seed") cfg.seed = field<std::uint64_t>(doc, key);
        else if (key == "sigma") cfg.sigma = field<double>(doc, key);
        else if (key == "false_alarm") cfg.false_alarm = field<double>(doc, key);
        else if (key == "alpha_list") cfg.alpha_list = field<std::vector<double>>(doc, key);
        else if (key == "protected_fraction_grid") cfg.protected_fraction_grid = field<std::vector<double>>(doc, key);
        else if (key == "magnitude") cfg.magnitude = field<double>(doc, key);
        else if (key == "attacks_per_branch") {
            const auto a = field<long long>(doc, key);
            if (a < 1) throw ValidationError("config: field 'attacks_per_branch' must be at least 1");
            cfg.attacks_per_branch = static_cast<std::size_t>(a);
        } else if (key == "attack_model") {
            const auto s = field<std::string>(doc, key);
            if (s == "naive") cfg.attack_model = AttackModel::naive;
            else if (s == "resilient") cfg.attack_model = AttackModel::resilient;
            else throw ValidationError("config: field 'attack_model' must be naive or resilient");
        } else if (key == "branches") cfg.branches = field<std::vector<std::size_t>>(doc, key);
        else if (key == "weights") {
            const auto s = field<std::string>(doc, key);
            if (s == "equal") cfg.weights = WeightMode::equal;
            else if (s == "prop") cfg.weights = WeightMode::admittance_proportional;
            else if (s.rfind("custom:", 0) == 0) {
                cfg.weights = WeightMode::custom;
                cfg.weights_path = s.substr(7);
            } else
                throw ValidationError("config: field 'weights' must be equal, prop or custom:PATH");
        } else if (key == "parallel") cfg.parallel = field<bool>(doc, key);
        else throw ValidationError("config: unknown field '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

namespace {

std::vector<std::size_t> selected_branches(const IncidenceModel& inc, const std::vector<std::size_t>& numbers) {
    std::vector<std::size_t> out;
    if (numbers.empty()) {
        for (std::size_t k = 0; k < inc.branch_count(); ++k) out.push_back(k);
        return out;
    }
    for (auto number : numbers) {
        const auto it = std::find(inc.case_branch.begin(), inc.case_branch.end(), number - 1);
        if (number < 1 || it == inc.case_branch.end())
            throw ValidationError("config: field 'branches' names branch " + std::to_string(number) +
                                  ", which is not in service");
        out.push_back(static_cast<std::size_t>(it - inc.case_branch.begin()));
    }
    return out;
}

Eigen::VectorXd naive_shift(std::size_t n, double magnitude, std::uint64_t seed) {
    Rng rng(seed, Stream::attack);
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    do {
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = magnitude * rng.uniform();
    } while (c.isZero(0.0));
    return c;
}

}  // namespace

DetectionReport run_detection_experiment(const GridCase& grid, const ExperimentConfig& cfg) {
    cfg.validate();
    const auto inc = build_incidence(grid);
    const auto adm = build_admittance(grid, inc);
    const auto jac = build_jacobian(inc, adm);
    const NoiseModel noise(cfg.sigma);
    const WlsEstimator baseline(jac, noise);
    const auto detector = detection_threshold(noise, jac.measurement_count(), jac.state_count(), cfg.false_alarm);

    const auto n = jac.state_count();
    const auto A = cfg.attacks_per_branch;
    DetectionReport report;
    report.case_name = grid.name;

    for (auto k : selected_branches(inc, cfg.branches)) {
        std::vector<WlsEstimator> post;
        for (double alpha : cfg.alpha_list) {
            const auto strategy = MtdStrategy::scaled({k}, adm, alpha);
            post.emplace_back(apply_mtd(adm, inc, strategy).jacobian, noise);
        }

        Eigen::MatrixXd attacks(static_cast<Eigen::Index>(jac.measurement_count()), static_cast<Eigen::Index>(A));
        const std::size_t single[] = {k};
        const auto constraints = cfg.attack_model == AttackModel::resilient
                                     ? std::optional<ConstraintSystem>(mtd_constraints(inc, single))
                                     : std::nullopt;
        for (std::size_t j = 0; j < A; ++j) {
            const auto seed = stream_seed(cfg.seed, k * A + j);
            const auto c = constraints ? sample_resilient_c(*constraints, cfg.magnitude, seed)
                                       : naive_shift(n, cfg.magnitude, seed);
            attacks.col(static_cast<Eigen::Index>(j)) =
                (constraints ? resilient_attack(jac, c) : naive_stealth_attack(jac, c)).a;
        }

        const kernels::TrialStreams streams{cfg.seed, static_cast<std::uint64_t>(k) * A * cfg.trials, cfg.trials};
        const auto counts = cfg.parallel
                                ? kernels::count_detections_omp(baseline, post, attacks, cfg.sigma, detector.tau, streams)
                                : kernels::count_detections_serial(baseline, post, attacks, cfg.sigma, detector.tau, streams);

        const auto total = static_cast<double>(counts.evaluations);
        const double base_rate = static_cast<double>(counts.baseline) / total;
        for (std::size_t p = 0; p < cfg.alpha_list.size(); ++p) {
            const double post_rate = static_cast<double>(counts.post[p]) / total;
            report.rows.push_back({inc.case_branch[k] + 1, cfg.alpha_list[p], base_rate, post_rate, post_rate - base_rate});
        }
    }
    return report;
}

DetectionReport run_detection_experiment(const ExperimentConfig& cfg) {
    return run_detection_experiment(load_case_file(cfg.case_path), cfg);
}

ExistenceReport run_existence_experiment(const GridCase& grid, const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.protected_fraction_grid.empty()) throw ValidationError("config: field 'protected_fraction_grid' must not be empty");
    const auto inc = build_incidence(grid);
    const auto l = inc.branch_count();

    ExistenceReport report;
    for (std::size_t i = 0; i < cfg.protected_fraction_grid.size(); ++i) {
        const double rho = cfg.protected_fraction_grid[i];
        const auto size = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(rho * static_cast<double>(l))), 1, l);
        const auto base = static_cast<std::uint64_t>(i) * cfg.trials;
        const auto counts = cfg.parallel ? kernels::count_existence_omp(inc, size, cfg.trials, cfg.seed, base)
                                         : kernels::count_existence_serial(inc, size, cfg.trials, cfg.seed, base);
        if (counts.disagreements != 0)
            throw std::logic_error("constraint system disagrees with the connectivity oracle on " +
                                   std::to_string(counts.disagreements) + " draws");
        report.rows.push_back({grid.name, rho, size, static_cast<double>(counts.feasible) / static_cast<double>(counts.draws)});
    }
    return report;
}

ExistenceReport run_existence_experiment(const ExperimentConfig& cfg) {
    return run_existence_experiment(load_case_file(cfg.case_path), cfg);
}

MstRow mst_row(const GridCase& grid, const WeightAssignment& weights) {
    const auto inc = build_incidence(grid);
    const auto tree = minimum_spanning_tree(inc, weights);
    MstRow row;
    row.case_name = grid.name;
    row.branches_in_mst = tree.size();
    row.total_branches = inc.branch_count();
    row.percentage = static_cast<double>(tree.size()) / static_cast<double>(inc.branch_count());
    return row;
}

std::vector<MstRow> run_mst_report(const std::vector<std::string>& case_paths, WeightMode mode,
                                   const std::string& weights_path) {
    std::vector<MstRow> rows;
    for (const auto& path : case_paths) {
        try {
            const auto grid = load_case_file(path);
            const auto inc = build_incidence(grid);
            const auto adm = build_admittance(grid, inc);
            WeightAssignment weights;
            switch (mode) {
                case WeightMode::equal: weights = WeightAssignment::equal(inc.branch_count()); break;
                case WeightMode::admittance_proportional: weights = WeightAssignment::admittance_proportional(adm); break;
                case WeightMode::custom:
                    weights = read_weights_json(read_text_file(weights_path), inc.branch_count());
                    break;
            }
            rows.push_back(mst_row(grid, weights));
        } catch (const ValidationError& e) {
            MstRow row;
            row.case_name = std::filesystem::path(path).stem().string();
            row.error = e.what();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_detection_csv(std::ostream& out, const DetectionReport& report) {
    out << "branch,alpha,baseline_rate,post_mtd_rate,increase\n";
    for (const auto& r : report.rows)
        out << r.branch << ',' << csv::format_float(r.alpha) << ',' << csv::format_float(r.baseline_rate) << ','
            << csv::format_float(r.post_mtd_rate) << ',' << csv::format_float(r.increase) << '\n';
}

void write_existence_csv(std::ostream& out, const ExistenceReport& report) {
    out << "case,fraction,protected_count,existence_probability\n";
    for (const auto& r : report.rows)
        out << r.case_name << ',' << csv::format_float(r.fraction) << ',' << r.protected_count << ','
            << csv::format_float(r.existence_probability) << '\n';
}

void write_mst_csv(std::ostream& out, const std::vector<MstRow>& rows) {
    out << "case,branches_in_mst,total_branches,percentage\n";
    for (const auto& r : rows) {
        if (r.error) {
            out << r.case_name << ",error,,\n";
            continue;
        }
        out << r.case_name << ',' << r.branches_in_mst << ',' << r.total_branches << ','
            << csv::format_float(r.percentage) << '\n';
    }
}

}  // namespace gridmtd
