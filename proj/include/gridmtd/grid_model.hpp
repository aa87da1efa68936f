#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gridmtd/case_io.hpp"

namespace gridmtd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Branch-bus incidence of the in-service network.
///
/// Bus positions are internal: the reference bus always sits at position 0
/// and the remaining buses follow in file order. Branch indices are 0-based
/// over in-service branches in file order; `case_branch` maps them back to
/// the 0-based row in `GridCase::branches`.
struct IncidenceModel {
    SparseMatrix A;  // l x (n+1), one +1 (from) and one -1 (to) per row
    std::vector<std::size_t> from_of;
    std::vector<std::size_t> to_of;
    std::vector<BusId> bus_ids;           // position -> bus id
    std::vector<std::size_t> case_branch;  // branch index -> GridCase row
    std::size_t reference_position = 0;

    std::size_t branch_count() const { return from_of.size(); }
    std::size_t bus_count() const { return bus_ids.size(); }
    std::size_t state_count() const { return bus_ids.size() - 1; }

    /// State index of a non-reference bus position (position - 1).
    static std::size_t state_of(std::size_t position) { return position - 1; }
};

struct AdmittanceModel {
    Eigen::VectorXd b;  // per-unit series susceptance, b_k = 1 / x_k
};

/// Row layout of the stacked measurement vector [p; f; -f].
struct MeasurementLayout {
    std::size_t bus_count = 0;
    std::size_t branch_count = 0;

    std::size_t rows() const { return bus_count + 2 * branch_count; }
    std::size_t injection_row(std::size_t position) const { return position; }
    std::size_t flow_row(std::size_t branch) const { return bus_count + branch; }
    std::size_t reverse_flow_row(std::size_t branch) const { return bus_count + branch_count + branch; }
};

struct JacobianModel {
    SparseMatrix full_matrix;  // m x (n+1), [A'DA; DA; -DA]
    SparseMatrix H;            // m x n, reference column removed
    MeasurementLayout layout;
    std::size_t reference_position = 0;

    std::size_t measurement_count() const { return layout.rows(); }
    std::size_t state_count() const { return static_cast<std::size_t>(H.cols()); }

    Eigen::MatrixXd dense_H() const { return Eigen::MatrixXd(H); }
    Eigen::MatrixXd dense_full() const { return Eigen::MatrixXd(full_matrix); }
};

/// Remaps the reference bus to position 0. Throws ValidationError when the
/// in-service graph is disconnected.
IncidenceModel build_incidence(const GridCase& grid);

AdmittanceModel build_admittance(const GridCase& grid);

/// Admittances on the in-service branches only, ordered like `inc`.
AdmittanceModel build_admittance(const GridCase& grid, const IncidenceModel& inc);

JacobianModel build_jacobian(const IncidenceModel& inc, const AdmittanceModel& adm);

/// Unit-admittance contribution of branch `k` to the full matrix: the
/// Jacobian equals the sum of b_k times this matrix over all branches.
SparseMatrix branch_component(const IncidenceModel& inc, std::size_t k);

/// Drops the reference column from an m x (n+1) matrix.
SparseMatrix remove_column(const SparseMatrix& full, std::size_t column);

/// Number of singular values above `tolerance * sigma_max`. A negative
/// tolerance selects max(rows, cols) * machine epsilon.
std::size_t numeric_rank(const Eigen::MatrixXd& M, double tolerance = -1.0);

/// Row-major, headerless, 17 significant digits.
void write_dense_csv(std::ostream& out, const Eigen::MatrixXd& M);

}  // namespace gridmtd
