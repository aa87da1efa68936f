#include "gridmtd/attack.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "gridmtd/csv.hpp"
#include "gridmtd/disjoint_set.hpp"
#include "gridmtd/rng.hpp"

namespace gridmtd {

namespace {

void require_nonzero_shift(const JacobianModel& jac, const Eigen::VectorXd& c) {
    if (static_cast<std::size_t>(c.size()) != jac.state_count())
        throw ValidationError("state shift has " + std::to_string(c.size()) + " entries, expected " +
                              std::to_string(jac.state_count()));
    if (c.isZero(0.0)) throw ValidationError("state shift c must be nonzero");
}

}  // namespace

bool ConstraintSystem::admits(const Eigen::VectorXd& c, double tol) const {
    if (static_cast<std::size_t>(c.size()) != state_count) return false;
    std::vector<std::optional<double>> class_value(free_dimension);
    for (std::size_t i = 0; i < state_count; ++i) {
        const auto v = c[static_cast<Eigen::Index>(i)];
        if (class_of[i] < 0) {
            if (std::abs(v) > tol) return false;
            continue;
        }
        auto& seen = class_value[static_cast<std::size_t>(class_of[i])];
        if (!seen)
            seen = v;
        else if (std::abs(*seen - v) > tol)
            return false;
    }
    return true;
}

AttackVector naive_stealth_attack(const JacobianModel& jac, const Eigen::VectorXd& c) {
    require_nonzero_shift(jac, c);
    return {jac.H * c, c};
}

ConstraintSystem mtd_constraints(const IncidenceModel& inc, std::span<const std::size_t> protected_branches) {
    if (protected_branches.empty()) throw ValidationError("MTD strategy protects no branch");

    // Node p is bus position p; the reference at position 0 is the zero node.
    DisjointSet sets(inc.bus_count());
    for (auto k : protected_branches) {
        if (k >= inc.branch_count())
            throw ValidationError("protected branch index " + std::to_string(k) + " out of range");
        sets.unite(inc.from_of[k], inc.to_of[k]);
    }

    ConstraintSystem cs;
    cs.state_count = inc.state_count();
    cs.class_of.assign(cs.state_count, -1);
    const auto zero_root = sets.find(inc.reference_position);
    std::vector<long> class_of_root(inc.bus_count(), -1);
    for (std::size_t position = 1; position < inc.bus_count(); ++position) {
        const auto root = sets.find(position);
        if (root == zero_root) continue;
        auto& id = class_of_root[root];
        if (id < 0) {
            id = static_cast<long>(cs.free_dimension++);
            cs.basis.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cs.state_count)));
        }
        const auto state = IncidenceModel::state_of(position);
        cs.class_of[state] = id;
        cs.basis[static_cast<std::size_t>(id)][static_cast<Eigen::Index>(state)] = 1.0;
    }
    return cs;
}

Eigen::VectorXd sample_resilient_c(const ConstraintSystem& cs, double magnitude, std::uint64_t seed) {
    if (cs.free_dimension == 0) throw ValidationError("no MTD-resilient attack exists for this protected set");
    if (!(magnitude > 0.0) || !std::isfinite(magnitude)) throw ValidationError("attack magnitude must be positive");

    Rng rng(seed, Stream::attack);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cs.state_count));
    do {
        c.setZero();
        for (const auto& direction : cs.basis) c += (magnitude * rng.uniform()) * direction;
    } while (c.isZero(0.0));
    return c;
}

AttackVector resilient_attack(const JacobianModel& jac_pre_mtd, const Eigen::VectorXd& c) {
    require_nonzero_shift(jac_pre_mtd, c);
    return {jac_pre_mtd.H * c, c};
}

StealthVerdict verify_stealth(const AttackVector& attack, const WlsEstimator& post_mtd, const Eigen::VectorXd& y,
                              double tol) {
    if (attack.a.size() != y.size())
        throw ValidationError("attack has " + std::to_string(attack.a.size()) + " entries, measurements have " +
                              std::to_string(y.size()));
    const Eigen::VectorXd y_attacked = y + attack.a;
    const double r_clean = post_mtd.residual(y);
    const double r_attacked = post_mtd.residual(y_attacked);

    StealthVerdict v;
    v.residual_delta = std::abs(r_attacked - r_clean);
    v.estimate_delta = (post_mtd.estimate(y_attacked) - post_mtd.estimate(y)).norm();
    v.residual_preserved = v.residual_delta <= tol * std::max(1.0, r_clean);
    v.estimate_shifted = v.estimate_delta > tol;
    return v;
}

StealthVerdict verify_stealth(const AttackVector& attack, const JacobianModel& jac_post_mtd, const NoiseModel& noise,
                              const Eigen::VectorXd& y, double tol) {
    return verify_stealth(attack, WlsEstimator(jac_post_mtd, noise), y, tol);
}

void write_attack_csv(std::ostream& out, const AttackVector& attack) {
    out << "index,value\n";
    for (Eigen::Index i = 0; i < attack.a.size(); ++i) out << (i + 1) << ',' << csv::format_float(attack.a[i]) << '\n';
}

}  // namespace gridmtd
