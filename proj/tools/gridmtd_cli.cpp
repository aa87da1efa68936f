// gridmtd: stealth data-injection attacks against DC state estimation
// under moving target defense, and spanning-tree countermeasures.

#include <algorithm>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridmtd/attack.hpp"
#include "gridmtd/csv.hpp"
#include "gridmtd/estimation.hpp"
#include "gridmtd/experiments.hpp"
#include "gridmtd/grid_model.hpp"
#include "gridmtd/mtd.hpp"
#include "gridmtd/rng.hpp"

namespace {

using namespace gridmtd;

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct Options {
    std::string case_path;
    std::vector<std::string> case_paths;
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 1;
    std::size_t trials = 1000;
    double sigma = 3.0;
    double fpr = 0.05;
    std::string alpha = "0.1";
    std::string fractions;
    std::string weights = "equal";
    double magnitude = 1.0;
    std::size_t attacks = 20;
    bool resilient = false;
    bool serial = false;
    bool full = false;
    std::string protected_list;
    std::string strategy_path;
};

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    fn(out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void parse_weights(const std::string& mode, ExperimentConfig& cfg) {
    if (mode == "equal") cfg.weights = WeightMode::equal;
    else if (mode == "prop") cfg.weights = WeightMode::admittance_proportional;
    else if (mode.rfind("custom:", 0) == 0) {
        cfg.weights = WeightMode::custom;
        cfg.weights_path = mode.substr(7);
    } else
        throw ValidationError("--weights must be equal, prop or custom:PATH");
}

ExperimentConfig build_config(const Options& o, const CLI::App& sub, ExperimentKind kind) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) cfg = load_experiment_config(read_text_file(o.config_path));
    cfg.experiment = kind;
    auto given = [&](const char* name) {
        const auto* opt = sub.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--case")) {
        cfg.case_path = o.case_paths.empty() ? o.case_path : o.case_paths.front();
        cfg.case_paths = o.case_paths;
    }
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--trials")) cfg.trials = o.trials;
    if (given("--sigma")) cfg.sigma = o.sigma;
    if (given("--fpr")) cfg.false_alarm = o.fpr;
    if (given("--alpha")) cfg.alpha_list = csv::parse_float_list(o.alpha);
    if (given("--fractions")) cfg.protected_fraction_grid = csv::parse_float_list(o.fractions);
    if (given("--weights")) parse_weights(o.weights, cfg);
    if (given("--magnitude")) cfg.magnitude = o.magnitude;
    if (given("--attacks")) cfg.attacks_per_branch = o.attacks;
    if (given("--resilient")) cfg.attack_model = o.resilient ? AttackModel::resilient : AttackModel::naive;
    if (given("--serial")) cfg.parallel = !o.serial;
    if (kind != ExperimentKind::mst_report && cfg.case_path.empty()) throw ValidationError("--case is required");
    cfg.validate();
    return cfg;
}

struct LoadedCase {
    GridCase grid;
    IncidenceModel inc;
    AdmittanceModel adm;
    JacobianModel jac;
};

LoadedCase load(const std::string& path) {
    if (path.empty()) throw ValidationError("--case is required");
    LoadedCase c{load_case_file(path), {}, {}, {}};
    c.inc = build_incidence(c.grid);
    c.adm = build_admittance(c.grid, c.inc);
    c.jac = build_jacobian(c.inc, c.adm);
    return c;
}

int cmd_parse(const Options& o) {
    const auto grid = load_case_file(o.case_path);
    const auto in_service = grid.in_service_count();
    std::cerr << grid.name << ": " << grid.buses.size() << " buses, " << grid.branches.size() << " branches ("
              << grid.branches.size() - in_service << " out of service), reference bus " << grid.reference_bus
              << '\n';
    emit(o.out_path, [&](std::ostream& out) { out << export_native_case(grid); });
    return 0;
}

int cmd_jacobian(const Options& o) {
    const auto c = load(o.case_path);
    const auto dense = o.full ? c.jac.dense_full() : c.jac.dense_H();
    std::cerr << c.grid.name << ": " << (o.full ? "full matrix " : "H ") << dense.rows() << " x " << dense.cols()
              << ", numeric rank " << numeric_rank(dense) << '\n';
    emit(o.out_path, [&](std::ostream& out) { write_dense_csv(out, dense); });
    return 0;
}

std::vector<std::size_t> protected_from_list(const std::string& list, const IncidenceModel& inc) {
    std::vector<std::size_t> out;
    for (double v : csv::parse_float_list(list)) {
        const auto number = static_cast<long>(v);
        if (v != static_cast<double>(number) || number < 1)
            throw ValidationError("--protected takes 1-based branch numbers");
        const auto it = std::find(inc.case_branch.begin(), inc.case_branch.end(), static_cast<std::size_t>(number - 1));
        if (it == inc.case_branch.end())
            throw ValidationError("branch " + std::to_string(number) + " is not an in-service branch");
        out.push_back(static_cast<std::size_t>(it - inc.case_branch.begin()));
    }
    return out;
}

int cmd_attack(const Options& o) {
    const auto c = load(o.case_path);
    const NoiseModel noise(o.sigma);
    const auto alphas = csv::parse_float_list(o.alpha);

    std::optional<MtdStrategy> strategy;
    if (!o.strategy_path.empty())
        strategy = read_strategy_json(read_text_file(o.strategy_path), c.inc);
    else if (!o.protected_list.empty())
        strategy = MtdStrategy::scaled(protected_from_list(o.protected_list, c.inc), c.adm, alphas.front());

    AttackVector attack;
    if (!strategy) {
        Rng rng(stream_seed(o.seed, 0), Stream::attack);
        Eigen::VectorXd shift(static_cast<Eigen::Index>(c.jac.state_count()));
        for (Eigen::Index i = 0; i < shift.size(); ++i) shift[i] = o.magnitude * rng.uniform();
        attack = naive_stealth_attack(c.jac, shift);
        std::cerr << "naive stealth attack (no MTD)\n";
    } else {
        const auto cs = mtd_constraints(c.inc, strategy->protected_branches);
        const auto [feasible, dim] = is_feasible(cs);
        if (!feasible)
            throw ValidationError("no MTD-resilient stealth attack exists: protected branches connect every bus to the reference");
        attack = resilient_attack(c.jac, sample_resilient_c(cs, o.magnitude, stream_seed(o.seed, 0)));
        const auto post = apply_mtd(c.adm, c.inc, *strategy);
        const auto y = sample_measurements(post.jacobian, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.jac.state_count())),
                                           noise, stream_seed(o.seed, 1));
        const auto v = verify_stealth(attack, post.jacobian, noise, y);
        std::cerr << "resilient attack, free dimension " << dim << "; post-MTD residual delta " << v.residual_delta
                  << ", estimate shift " << v.estimate_delta << " -> "
                  << (v.stealthy_attack() ? "stealthy" : "NOT stealthy") << '\n';
    }
    emit(o.out_path, [&](std::ostream& out) { write_attack_csv(out, attack); });
    return 0;
}

int cmd_mtd_plan(const Options& o) {
    const auto c = load(o.case_path);
    ExperimentConfig tmp;
    parse_weights(o.weights, tmp);
    const auto alphas = csv::parse_float_list(o.alpha);
    WeightAssignment weights;
    switch (tmp.weights) {
        case WeightMode::equal: weights = WeightAssignment::equal(c.inc.branch_count()); break;
        case WeightMode::admittance_proportional: weights = WeightAssignment::admittance_proportional(c.adm); break;
        case WeightMode::custom:
            weights = read_weights_json(read_text_file(tmp.weights_path), c.inc.branch_count());
            break;
    }
    const auto strategy = spanning_tree_strategy(c.inc, c.adm, weights, alphas.front());
    std::cerr << c.grid.name << ": " << strategy.protected_branches.size() << " of " << c.inc.branch_count()
              << " branches protected (" << csv::format_float(static_cast<double>(strategy.protected_branches.size()) /
                                                              static_cast<double>(c.inc.branch_count()))
              << ")\n";
    emit(o.out_path, [&](std::ostream& out) { out << write_strategy_json(strategy, c.inc); });
    return 0;
}

int cmd_detect(const Options& o, const CLI::App& sub) {
    const auto cfg = build_config(o, sub, ExperimentKind::detection_increase);
    const auto report = run_detection_experiment(cfg);
    emit(o.out_path, [&](std::ostream& out) { write_detection_csv(out, report); });
    return 0;
}

int cmd_exist(const Options& o, const CLI::App& sub) {
    const auto cfg = build_config(o, sub, ExperimentKind::existence_probability);
    const auto report = run_existence_experiment(cfg);
    emit(o.out_path, [&](std::ostream& out) { write_existence_csv(out, report); });
    return 0;
}

int cmd_mst(const Options& o, const CLI::App& sub) {
    const auto cfg = build_config(o, sub, ExperimentKind::mst_report);
    auto paths = cfg.case_paths;
    if (paths.empty()) paths.push_back(cfg.case_path);
    const auto rows = run_mst_report(paths, cfg.weights, cfg.weights_path);
    emit(o.out_path, [&](std::ostream& out) { write_mst_csv(out, rows); });
    for (const auto& r : rows)
        if (r.error) std::cerr << r.case_name << ": " << *r.error << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stealth attacks under moving target defense on DC state estimation"};
    app.require_subcommand(1);
    Options o;

    auto add_case = [&](CLI::App* sub) { sub->add_option("--case", o.case_path, "Case file (.m or .json)"); };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out_path, "Output path (default stdout)"); };
    auto add_experiment = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "Experiment config JSON");
        sub->add_option("--seed", o.seed, "Experiment seed");
        sub->add_option("--trials", o.trials, "Trials per cell");
        sub->add_option("--sigma", o.sigma, "Noise standard deviation");
        sub->add_option("--fpr", o.fpr, "False alarm rate of the detector");
        sub->add_flag("--serial", o.serial, "Use the serial reference kernels");
    };

    auto* parse = app.add_subcommand("parse", "Validate a case and print it as native JSON");
    add_case(parse);
    add_out(parse);

    auto* jacobian = app.add_subcommand("jacobian", "Dump the measurement Jacobian as dense CSV");
    add_case(jacobian);
    add_out(jacobian);
    jacobian->add_flag("--full", o.full, "Dump the rank-deficient full matrix instead of H");

    auto* attack = app.add_subcommand("attack", "Build a stealth attack, MTD-resilient when branches are protected");
    add_case(attack);
    add_out(attack);
    attack->add_option("--protected", o.protected_list, "Protected branch numbers, comma separated");
    attack->add_option("--strategy", o.strategy_path, "Strategy JSON (overrides --protected)");
    attack->add_option("--seed", o.seed, "Seed");
    attack->add_option("--sigma", o.sigma, "Noise standard deviation for verification");
    attack->add_option("--alpha", o.alpha, "Admittance scaling for --protected");
    attack->add_option("--magnitude", o.magnitude, "Scale of the injected state shift");

    auto* plan = app.add_subcommand("mtd-plan", "Spanning-tree MTD strategy");
    add_case(plan);
    add_out(plan);
    plan->add_option("--weights", o.weights, "equal | prop | custom:PATH");
    plan->add_option("--alpha", o.alpha, "delta_b = alpha * b on protected branches");

    auto* detect_exp = app.add_subcommand("detect-exp", "Detection increase under single-branch MTD");
    add_case(detect_exp);
    add_out(detect_exp);
    add_experiment(detect_exp);
    detect_exp->add_option("--alpha", o.alpha, "Admittance scalings, comma separated");
    detect_exp->add_option("--magnitude", o.magnitude, "Scale of the injected state shift");
    detect_exp->add_option("--attacks", o.attacks, "Attacks per protected branch");
    detect_exp->add_flag("--resilient", o.resilient, "Attacker knows the protected branch");

    auto* exist_exp = app.add_subcommand("exist-exp", "Existence probability of resilient attacks vs protected fraction");
    add_case(exist_exp);
    add_out(exist_exp);
    add_experiment(exist_exp);
    exist_exp->add_option("--fractions", o.fractions, "Protected fractions, comma separated");

    auto* mst = app.add_subcommand("mst-report", "Spanning-tree size per case");
    mst->add_option("--case", o.case_paths, "Case files")->take_all();
    add_out(mst);
    mst->add_option("--config", o.config_path, "Experiment config JSON");
    mst->add_option("--weights", o.weights, "equal | prop | custom:PATH");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*parse) return cmd_parse(o);
        if (*jacobian) return cmd_jacobian(o);
        if (*attack) return cmd_attack(o);
        if (*plan) return cmd_mtd_plan(o);
        if (*detect_exp) return cmd_detect(o, *detect_exp);
        if (*exist_exp) return cmd_exist(o, *exist_exp);
        if (*mst) return cmd_mst(o, *mst);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
