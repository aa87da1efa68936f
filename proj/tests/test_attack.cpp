#include <queue>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "gridmtd/attack.hpp"
#include "gridmtd/mtd.hpp"
#include "gridmtd/rng.hpp"
#include "gridmtd/trial_kernels.hpp"
#include "test_support.hpp"

using namespace gridmtd;
using Eigen::VectorXd;

namespace {

VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed, Stream::state);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
    return v;
}

// Breadth-first search over the protected branches from the reference bus.
bool reaches_every_bus(const IncidenceModel& inc, const std::vector<std::size_t>& branches) {
    std::vector<std::vector<std::size_t>> adj(inc.bus_count());
    for (auto k : branches) {
        adj[inc.from_of[k]].push_back(inc.to_of[k]);
        adj[inc.to_of[k]].push_back(inc.from_of[k]);
    }
    std::vector<bool> seen(inc.bus_count(), false);
    std::queue<std::size_t> q;
    q.push(inc.reference_position);
    seen[inc.reference_position] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (auto v : adj[u])
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                q.push(v);
            }
    }
    return count == inc.bus_count();
}

}  // namespace

TEST_CASE("naive stealth attack on the toy") {
    const auto s = test::unit_toy();
    const auto attack = naive_stealth_attack(s.jac, VectorXd::Ones(2));
    VectorXd expected(9);
    expected << -2, 1, 1, -1, -1, 0, 1, 1, 0;
    CHECK(attack.a == expected);
    REQUIRE(attack.generating_c);
    CHECK(*attack.generating_c == VectorXd::Ones(2));

    VectorXd e1 = VectorXd::Zero(2);
    e1[0] = 1.0;
    CHECK(naive_stealth_attack(s.jac, e1).a == s.jac.dense_H().col(0));

    CHECK_THROWS_AS(naive_stealth_attack(s.jac, VectorXd::Zero(2)), ValidationError);
    CHECK_THROWS_AS(naive_stealth_attack(s.jac, VectorXd::Ones(3)), ValidationError);
}

TEST_CASE("naive attacks are stealthy without MTD") {
    const auto s = test::system("case14.m");
    const NoiseModel noise(3.0);
    const WlsEstimator est(s.jac, noise);
    for (std::uint64_t t = 0; t < 100; ++t) {
        const VectorXd c = random_vector(13, t);
        const auto y = sample_measurements(s.jac, random_vector(13, t + 1000), noise, t);
        const auto attack = naive_stealth_attack(s.jac, c);
        const auto v = verify_stealth(attack, est, y);
        CHECK(v.stealthy_attack());
        CHECK((est.estimate(y + attack.a) - est.estimate(y) - c).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("constraint systems on the toy") {
    const auto s = test::unit_toy();

    SUBCASE("branch 2-3 ties the two states") {
        const std::vector<std::size_t> set{2};
        const auto cs = mtd_constraints(s.inc, set);
        CHECK(cs.class_of == std::vector<long>{0, 0});
        CHECK(is_feasible(cs) == std::pair<bool, std::size_t>{true, 1});
        CHECK(cs.admits(VectorXd::Ones(2)));
        CHECK_FALSE(cs.admits(VectorXd::Unit(2, 0)));
    }
    SUBCASE("branches 1-2 and 2-3 pin everything") {
        const std::vector<std::size_t> set{0, 2};
        const auto cs = mtd_constraints(s.inc, set);
        CHECK(cs.class_of == std::vector<long>{-1, -1});
        CHECK_FALSE(is_feasible(cs).first);
        CHECK_THROWS_AS(sample_resilient_c(cs, 1.0, 1), ValidationError);
    }
    SUBCASE("a branch at the reference pins one state") {
        const std::vector<std::size_t> set{0};
        const auto cs = mtd_constraints(s.inc, set);
        CHECK(cs.class_of == std::vector<long>{-1, 0});
        CHECK(is_feasible(cs) == std::pair<bool, std::size_t>{true, 1});
    }
    SUBCASE("bad sets") {
        CHECK_THROWS_AS(mtd_constraints(s.inc, std::vector<std::size_t>{}), ValidationError);
        CHECK_THROWS_AS(mtd_constraints(s.inc, std::vector<std::size_t>{3}), ValidationError);
    }
}

TEST_CASE("single branch away from the reference leaves n-1 free directions") {
    const auto s = test::system("case30.m");
    for (std::size_t k = 0; k < s.inc.branch_count(); ++k) {
        if (s.inc.from_of[k] == 0 || s.inc.to_of[k] == 0) continue;
        const std::vector<std::size_t> set{k};
        CHECK(is_feasible(mtd_constraints(s.inc, set)) ==
              std::pair<bool, std::size_t>{true, s.inc.state_count() - 1});
    }
}

TEST_CASE("protecting every branch leaves no attack") {
    for (const auto* file : {"case14.m", "case30.m"}) {
        const auto s = test::system(file);
        std::vector<std::size_t> all(s.inc.branch_count());
        for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
        CHECK(is_feasible(mtd_constraints(s.inc, all)) == std::pair<bool, std::size_t>{false, 0});
    }
}

TEST_CASE("sampled resilient shifts satisfy their constraints") {
    const auto s = test::system("case14.m");
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto subset = kernels::draw_subset(s.inc.branch_count(), 6, seed);
        const auto cs = mtd_constraints(s.inc, subset);
        if (!is_feasible(cs).first) continue;
        const auto c = sample_resilient_c(cs, 2.0, seed);
        CHECK(cs.admits(c));
        CHECK_FALSE(c.isZero(0.0));
        for (std::size_t i = 0; i < cs.state_count; ++i)
            if (cs.class_of[i] < 0) CHECK(c[static_cast<Eigen::Index>(i)] == 0.0);
        CHECK(c.maxCoeff() <= 2.0);
        CHECK(c.minCoeff() >= 0.0);
    }
    const std::vector<std::size_t> set{3};
    const auto cs = mtd_constraints(s.inc, set);
    CHECK(sample_resilient_c(cs, 1.0, 5) == sample_resilient_c(cs, 1.0, 5));
    CHECK_THROWS_AS(sample_resilient_c(cs, 0.0, 5), ValidationError);
}

TEST_CASE("resilient attack on the toy has zero flow on the protected branch") {
    const auto s = test::unit_toy();
    const std::vector<std::size_t> set{2};
    const auto cs = mtd_constraints(s.inc, set);
    const auto c = sample_resilient_c(cs, 1.0, 3);
    const auto attack = resilient_attack(s.jac, c);
    CHECK(attack.a[5] == 0.0);
    CHECK(attack.a[8] == 0.0);
}

TEST_CASE("resilient attacks survive any admittance change on the protected set") {
    const auto s = test::system("case14.m");
    const NoiseModel noise(3.0);
    const std::vector<std::size_t> set{2, 7, 11, 15};
    const auto cs = mtd_constraints(s.inc, set);
    REQUIRE(is_feasible(cs).first);
    const auto c = sample_resilient_c(cs, 1.0, 21);
    const auto attack = resilient_attack(s.jac, c);
    for (auto k : set) {
        CHECK(attack.a[static_cast<Eigen::Index>(s.jac.layout.flow_row(k))] == 0.0);
        CHECK(attack.a[static_cast<Eigen::Index>(s.jac.layout.reverse_flow_row(k))] == 0.0);
    }
    for (double alpha : {0.01, 0.5, 10.0, -0.5}) {
        CAPTURE(alpha);
        const auto post = apply_mtd(s.adm, s.inc, MtdStrategy::scaled(set, s.adm, alpha));
        // The post-MTD Jacobian maps c to the same attack.
        CHECK(((post.jacobian.H - s.jac.H) * c).cwiseAbs().maxCoeff() < 1e-10);
        const WlsEstimator est(post.jacobian, noise);
        const auto y = sample_measurements(post.jacobian, random_vector(13, 4), noise, 4);
        const auto v = verify_stealth(attack, est, y);
        CHECK(v.stealthy_attack());
        CHECK((est.estimate(y + attack.a) - est.estimate(y) - c).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("verify_stealth verdicts") {
    const auto s = test::system("case14.m");
    const NoiseModel noise(3.0);
    const auto y = sample_measurements(s.jac, random_vector(13, 1), noise, 1);

    SUBCASE("zero attack is preserved but shifts nothing") {
        const AttackVector none{VectorXd::Zero(y.size()), std::nullopt};
        const auto v = verify_stealth(none, s.jac, noise, y);
        CHECK(v.residual_preserved);
        CHECK_FALSE(v.estimate_shifted);
        CHECK_FALSE(v.stealthy_attack());
    }
    SUBCASE("naive attack is exposed by a large MTD") {
        const std::vector<std::size_t> set{0, 1, 2};
        const auto post = apply_mtd(s.adm, s.inc, MtdStrategy::scaled(set, s.adm, 5.0));
        const auto attack = naive_stealth_attack(s.jac, 3.0 * random_vector(13, 8));
        CHECK_FALSE(verify_stealth(attack, post.jacobian, noise, y).residual_preserved);
    }
    SUBCASE("size mismatch") {
        const AttackVector bad{VectorXd::Zero(3), std::nullopt};
        CHECK_THROWS_AS(verify_stealth(bad, s.jac, noise, y), ValidationError);
    }
}

TEST_CASE("feasibility matches graph connectivity") {
    SUBCASE("every subset of the toy") {
        const auto s = test::unit_toy();
        for (unsigned mask = 0; mask < 8; ++mask) {
            std::vector<std::size_t> set;
            for (std::size_t k = 0; k < 3; ++k)
                if (mask & (1u << k)) set.push_back(k);
            if (set.empty()) {
                CHECK_THROWS_AS(mtd_constraints(s.inc, set), ValidationError);
                continue;
            }
            CHECK(is_feasible(mtd_constraints(s.inc, set)).first == !reaches_every_bus(s.inc, set));
        }
    }
    SUBCASE("random subsets of case14") {
        const auto s = test::system("case14.m");
        Rng sizes(77, Stream::subset);
        for (std::uint64_t t = 0; t < 1000; ++t) {
            const auto size = 1 + static_cast<std::size_t>(sizes.index(s.inc.branch_count()));
            const auto set = kernels::draw_subset(s.inc.branch_count(), size, stream_seed(5, t));
            CHECK(is_feasible(mtd_constraints(s.inc, set)).first == !reaches_every_bus(s.inc, set));
        }
    }
}

TEST_CASE("attack CSV") {
    const auto s = test::unit_toy();
    std::ostringstream out;
    write_attack_csv(out, naive_stealth_attack(s.jac, VectorXd::Ones(2)));
    CHECK(out.str() == "index,value\n1,-2\n2,1\n3,1\n4,-1\n5,-1\n6,0\n7,1\n8,1\n9,0\n");
}
