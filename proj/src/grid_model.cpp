#include "gridmtd/grid_model.hpp"

#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include <Eigen/SVD>

namespace gridmtd {

IncidenceModel build_incidence(const GridCase& grid) {
    validate(grid);

    IncidenceModel inc;
    inc.bus_ids.push_back(grid.reference_bus);
    for (auto id : grid.buses)
        if (id != grid.reference_bus) inc.bus_ids.push_back(id);

    std::unordered_map<BusId, std::size_t> position;
    for (std::size_t p = 0; p < inc.bus_ids.size(); ++p) position.emplace(inc.bus_ids[p], p);

    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t row = 0; row < grid.branches.size(); ++row) {
        const auto& br = grid.branches[row];
        if (!br.in_service()) continue;
        const auto k = inc.from_of.size();
        inc.from_of.push_back(position.at(br.from_bus));
        inc.to_of.push_back(position.at(br.to_bus));
        inc.case_branch.push_back(row);
        triplets.emplace_back(static_cast<int>(k), static_cast<int>(inc.from_of.back()), 1.0);
        triplets.emplace_back(static_cast<int>(k), static_cast<int>(inc.to_of.back()), -1.0);
    }

    inc.A.resize(static_cast<Eigen::Index>(inc.branch_count()), static_cast<Eigen::Index>(inc.bus_count()));
    inc.A.setFromTriplets(triplets.begin(), triplets.end());
    return inc;
}

AdmittanceModel build_admittance(const GridCase& grid) {
    AdmittanceModel adm;
    adm.b.resize(static_cast<Eigen::Index>(grid.in_service_count()));
    Eigen::Index k = 0;
    for (std::size_t row = 0; row < grid.branches.size(); ++row) {
        const auto& br = grid.branches[row];
        if (!br.in_service()) continue;
        if (br.reactance == 0.0)
            throw ValidationError("branch " + std::to_string(row + 1) + " has zero reactance");
        adm.b[k++] = 1.0 / br.reactance;
    }
    return adm;
}

AdmittanceModel build_admittance(const GridCase& grid, const IncidenceModel& inc) {
    AdmittanceModel adm;
    adm.b.resize(static_cast<Eigen::Index>(inc.branch_count()));
    for (std::size_t k = 0; k < inc.branch_count(); ++k) {
        const auto& br = grid.branches.at(inc.case_branch[k]);
        if (br.reactance == 0.0)
            throw ValidationError("branch " + std::to_string(inc.case_branch[k] + 1) + " has zero reactance");
        adm.b[static_cast<Eigen::Index>(k)] = 1.0 / br.reactance;
    }
    return adm;
}

namespace {

// Appends b * H_k to the triplet list. Every caller walks branches in
// index order, so duplicate entries are summed in the same order.
void append_branch_triplets(const IncidenceModel& inc, const MeasurementLayout& layout, std::size_t k, double b,
                            std::vector<Eigen::Triplet<double>>& out) {
    const auto f = static_cast<int>(inc.from_of[k]);
    const auto t = static_cast<int>(inc.to_of[k]);
    const auto pf = static_cast<int>(layout.injection_row(inc.from_of[k]));
    const auto pt = static_cast<int>(layout.injection_row(inc.to_of[k]));
    const auto fr = static_cast<int>(layout.flow_row(k));
    const auto rr = static_cast<int>(layout.reverse_flow_row(k));
    out.emplace_back(pf, f, b);
    out.emplace_back(pf, t, -b);
    out.emplace_back(pt, f, -b);
    out.emplace_back(pt, t, b);
    out.emplace_back(fr, f, b);
    out.emplace_back(fr, t, -b);
    out.emplace_back(rr, f, -b);
    out.emplace_back(rr, t, b);
}

}  // namespace

SparseMatrix remove_column(const SparseMatrix& full, std::size_t column) {
    const auto col = static_cast<Eigen::Index>(column);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (Eigen::Index r = 0; r < full.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(full, r); it; ++it) {
            if (it.col() == col) continue;
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col() > col ? it.col() - 1 : it.col()),
                                  it.value());
        }
    SparseMatrix out(full.rows(), full.cols() - 1);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

JacobianModel build_jacobian(const IncidenceModel& inc, const AdmittanceModel& adm) {
    if (static_cast<std::size_t>(adm.b.size()) != inc.branch_count())
        throw ValidationError("admittance vector has " + std::to_string(adm.b.size()) + " entries, expected " +
                              std::to_string(inc.branch_count()));

    JacobianModel jac;
    jac.layout = {inc.bus_count(), inc.branch_count()};
    jac.reference_position = inc.reference_position;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(8 * inc.branch_count());
    for (std::size_t k = 0; k < inc.branch_count(); ++k)
        append_branch_triplets(inc, jac.layout, k, adm.b[static_cast<Eigen::Index>(k)], triplets);

    jac.full_matrix.resize(static_cast<Eigen::Index>(jac.layout.rows()), static_cast<Eigen::Index>(inc.bus_count()));
    jac.full_matrix.setFromTriplets(triplets.begin(), triplets.end());
    jac.H = remove_column(jac.full_matrix, inc.reference_position);
    return jac;
}

SparseMatrix branch_component(const IncidenceModel& inc, std::size_t k) {
    if (k >= inc.branch_count())
        throw ValidationError("branch index " + std::to_string(k) + " out of range (" +
                              std::to_string(inc.branch_count()) + " branches)");
    const MeasurementLayout layout{inc.bus_count(), inc.branch_count()};
    std::vector<Eigen::Triplet<double>> triplets;
    append_branch_triplets(inc, layout, k, 1.0, triplets);
    SparseMatrix out(static_cast<Eigen::Index>(layout.rows()), static_cast<Eigen::Index>(inc.bus_count()));
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

std::size_t numeric_rank(const Eigen::MatrixXd& M, double tolerance) {
    if (M.size() == 0) return 0;
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    if (tolerance < 0.0)
        tolerance = static_cast<double>(std::max(M.rows(), M.cols())) * std::numeric_limits<double>::epsilon();
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > tolerance * s[0]) ++rank;
    return rank;
}

void write_dense_csv(std::ostream& out, const Eigen::MatrixXd& M) {
    char buf[32];
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", M(r, c));
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace gridmtd
