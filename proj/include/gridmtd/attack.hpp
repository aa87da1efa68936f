#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gridmtd/estimation.hpp"
#include "gridmtd/grid_model.hpp"

namespace gridmtd {

struct AttackVector {
    Eigen::VectorXd a;                         // length m
    std::optional<Eigen::VectorXd> generating_c;  // length n, a = H_pre c
};

/// Constraints on the state shift c that keep an attack stealthy after an
/// MTD on the protected branches.
///
/// Built by union-find over bus positions, where position 0 (the reference
/// bus, whose angle is pinned) doubles as the zero class. A protected branch
/// merges its two endpoints; if one endpoint is the reference, the other
/// state entry is forced to zero. Feasible c are exactly the span of `basis`.
struct ConstraintSystem {
    std::size_t state_count = 0;
    std::vector<long> class_of;  // per state index; -1 = zero class
    std::size_t free_dimension = 0;
    std::vector<Eigen::VectorXd> basis;  // class indicators, ordered by smallest member

    /// True when c satisfies every class constraint up to `tol`.
    bool admits(const Eigen::VectorXd& c, double tol = 0.0) const;
};

struct StealthVerdict {
    double residual_delta = 0.0;  // |r'(y + a) - r'(y)|
    double estimate_delta = 0.0;  // ||K'(y + a) - K' y||
    bool residual_preserved = false;
    bool estimate_shifted = false;

    bool stealthy_attack() const { return residual_preserved && estimate_shifted; }
};

/// a = H c. Throws ValidationError for c = 0.
AttackVector naive_stealth_attack(const JacobianModel& jac, const Eigen::VectorXd& c);

/// `protected_branches` are 0-based branch indices of `inc`.
ConstraintSystem mtd_constraints(const IncidenceModel& inc, std::span<const std::size_t> protected_branches);

/// (free_dimension > 0, free_dimension)
inline std::pair<bool, std::size_t> is_feasible(const ConstraintSystem& cs) {
    return {cs.free_dimension > 0, cs.free_dimension};
}

/// magnitude * sum_j u_j basis_j with u_j ~ U(0, 1) from Rng(seed, Stream::attack).
Eigen::VectorXd sample_resilient_c(const ConstraintSystem& cs, double magnitude, std::uint64_t seed);

/// a = H c with the pre-MTD Jacobian. Stealthy against any admittance
/// change on the protected branches when cs.admits(c).
AttackVector resilient_attack(const JacobianModel& jac_pre_mtd, const Eigen::VectorXd& c);

/// Empirical check of stealth against the post-MTD estimator. The residual
/// test is relative to max(1, r'(y)); the estimate test is absolute.
StealthVerdict verify_stealth(const AttackVector& attack, const WlsEstimator& post_mtd, const Eigen::VectorXd& y,
                              double tol = 1e-8);

StealthVerdict verify_stealth(const AttackVector& attack, const JacobianModel& jac_post_mtd, const NoiseModel& noise,
                              const Eigen::VectorXd& y, double tol = 1e-8);

/// CSV with header `index,value`, 1-based index, 6 significant digits.
void write_attack_csv(std::ostream& out, const AttackVector& attack);

}  // namespace gridmtd
