#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gridmtd/case_io.hpp"
#include "gridmtd/grid_model.hpp"

namespace gridmtd {

/// Protected branches and their admittance changes. Indices are 0-based
/// branch indices of the IncidenceModel; `protected_branches` is sorted and
/// unique, and `delta_b` has exactly those keys.
struct MtdStrategy {
    std::vector<std::size_t> protected_branches;
    std::map<std::size_t, double> delta_b;

    /// delta_b_i = alpha * b_i on each listed branch.
    static MtdStrategy scaled(std::vector<std::size_t> branches, const AdmittanceModel& adm, double alpha);
};

/// Throws ValidationError unless the strategy is well formed against `adm`
/// and every post-MTD admittance b_i + delta_b_i stays nonzero.
void validate(const MtdStrategy& strategy, const AdmittanceModel& adm);

enum class WeightMode { equal, admittance_proportional, custom };

struct WeightAssignment {
    WeightMode mode = WeightMode::equal;
    Eigen::VectorXd weights;

    static WeightAssignment equal(std::size_t branch_count);
    /// w_k = kappa * |b_k|
    static WeightAssignment admittance_proportional(const AdmittanceModel& adm, double kappa = 1.0);
    static WeightAssignment custom(Eigen::VectorXd weights);
};

std::string_view to_string(WeightMode mode);

struct PostMtdSystem {
    AdmittanceModel admittance;
    JacobianModel jacobian;
};

PostMtdSystem apply_mtd(const AdmittanceModel& adm, const IncidenceModel& inc, const MtdStrategy& strategy);

/// Minimum spanning tree by Prim's algorithm from the reference bus; ties
/// on weight go to the smaller branch index.
std::vector<std::size_t> minimum_spanning_tree(const IncidenceModel& inc, const WeightAssignment& weights);

MtdStrategy spanning_tree_strategy(const IncidenceModel& inc, const AdmittanceModel& adm,
                                   const WeightAssignment& weights, double alpha = 0.1);

MtdStrategy spanning_tree_strategy(const GridCase& grid, WeightMode mode, double alpha = 0.1);

/// True when the protected branches connect every bus to the reference.
bool is_protecting(const MtdStrategy& strategy, const IncidenceModel& inc);
bool connects_all_buses(const IncidenceModel& inc, const std::vector<std::size_t>& branches);

/// Strategy files use 1-based case branch numbers (file order):
/// {"protected": [..], "delta_b": {"<number>": value}}.
MtdStrategy read_strategy_json(std::string_view text, const IncidenceModel& inc);
std::string write_strategy_json(const MtdStrategy& strategy, const IncidenceModel& inc);

/// JSON array of one weight per in-service branch.
WeightAssignment read_weights_json(std::string_view text, std::size_t branch_count);

}  // namespace gridmtd
