#pragma once

#include <string>

#include "gridmtd/case_io.hpp"
#include "gridmtd/grid_model.hpp"

namespace gridmtd::test {

inline std::string case_path(const std::string& file) { return std::string(GRIDMTD_DATA_DIR) + "/" + file; }

inline GridCase load(const std::string& file) { return load_case_file(case_path(file)); }

struct System {
    GridCase grid;
    IncidenceModel inc;
    AdmittanceModel adm;
    JacobianModel jac;
};

inline System system(const std::string& file) {
    System s{load(file), {}, {}, {}};
    s.inc = build_incidence(s.grid);
    s.adm = build_admittance(s.grid, s.inc);
    s.jac = build_jacobian(s.inc, s.adm);
    return s;
}

/// Toy system with unit admittances on branches 1->2, 1->3, 2->3.
inline System unit_toy() {
    System s = system("toy3.json");
    for (auto& br : s.grid.branches) br.reactance = 1.0;
    s.adm = build_admittance(s.grid, s.inc);
    s.jac = build_jacobian(s.inc, s.adm);
    return s;
}

inline const char* kBundledCases[] = {"case14.m", "case30.m", "case57.m", "case118.m", "case300.m"};

}  // namespace gridmtd::test
