#include "gridmtd/mtd.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "gridmtd/disjoint_set.hpp"
#include "json.hpp"

namespace gridmtd {

MtdStrategy MtdStrategy::scaled(std::vector<std::size_t> branches, const AdmittanceModel& adm, double alpha) {
    std::sort(branches.begin(), branches.end());
    branches.erase(std::unique(branches.begin(), branches.end()), branches.end());
    MtdStrategy s;
    for (auto k : branches) {
        if (k >= static_cast<std::size_t>(adm.b.size()))
            throw ValidationError("protected branch index " + std::to_string(k) + " out of range");
        s.delta_b[k] = alpha * adm.b[static_cast<Eigen::Index>(k)];
    }
    s.protected_branches = std::move(branches);
    return s;
}

void validate(const MtdStrategy& strategy, const AdmittanceModel& adm) {
    const auto l = static_cast<std::size_t>(adm.b.size());
    if (!std::is_sorted(strategy.protected_branches.begin(), strategy.protected_branches.end()) ||
        std::adjacent_find(strategy.protected_branches.begin(), strategy.protected_branches.end()) !=
            strategy.protected_branches.end())
        throw ValidationError("protected branches must be sorted and unique");
    if (strategy.delta_b.size() != strategy.protected_branches.size())
        throw ValidationError("delta_b must have one entry per protected branch");
    for (auto k : strategy.protected_branches) {
        if (k >= l) throw ValidationError("protected branch index " + std::to_string(k) + " out of range");
        const auto it = strategy.delta_b.find(k);
        if (it == strategy.delta_b.end())
            throw ValidationError("delta_b has no entry for protected branch " + std::to_string(k));
        if (!std::isfinite(it->second)) throw ValidationError("delta_b must be finite");
        if (adm.b[static_cast<Eigen::Index>(k)] + it->second == 0.0)
            throw ValidationError("post-MTD admittance of branch " + std::to_string(k) + " would be zero");
    }
}

WeightAssignment WeightAssignment::equal(std::size_t branch_count) {
    return {WeightMode::equal, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(branch_count))};
}

WeightAssignment WeightAssignment::admittance_proportional(const AdmittanceModel& adm, double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("proportionality constant must be positive");
    return {WeightMode::admittance_proportional, kappa * adm.b.cwiseAbs()};
}

WeightAssignment WeightAssignment::custom(Eigen::VectorXd weights) {
    if (!weights.allFinite()) throw ValidationError("custom weights must be finite");
    return {WeightMode::custom, std::move(weights)};
}

std::string_view to_string(WeightMode mode) {
    switch (mode) {
        case WeightMode::equal: return "equal";
        case WeightMode::admittance_proportional: return "prop";
        case WeightMode::custom: return "custom";
    }
    return "?";
}

PostMtdSystem apply_mtd(const AdmittanceModel& adm, const IncidenceModel& inc, const MtdStrategy& strategy) {
    validate(strategy, adm);
    PostMtdSystem post;
    post.admittance = adm;
    for (const auto& [k, delta] : strategy.delta_b) post.admittance.b[static_cast<Eigen::Index>(k)] += delta;
    post.jacobian = build_jacobian(inc, post.admittance);
    return post;
}

std::vector<std::size_t> minimum_spanning_tree(const IncidenceModel& inc, const WeightAssignment& weights) {
    const auto l = inc.branch_count();
    if (static_cast<std::size_t>(weights.weights.size()) != l)
        throw ValidationError("weight vector has " + std::to_string(weights.weights.size()) + " entries, expected " +
                              std::to_string(l));

    std::vector<std::vector<std::size_t>> incident(inc.bus_count());
    for (std::size_t k = 0; k < l; ++k) {
        incident[inc.from_of[k]].push_back(k);
        incident[inc.to_of[k]].push_back(k);
    }

    // (weight, branch, far end); std::greater gives a min-heap with
    // ties broken by branch index.
    using Entry = std::tuple<double, std::size_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::vector<bool> in_tree(inc.bus_count(), false);
    auto visit = [&](std::size_t bus) {
        in_tree[bus] = true;
        for (auto k : incident[bus]) {
            const auto other = inc.from_of[k] == bus ? inc.to_of[k] : inc.from_of[k];
            if (!in_tree[other]) heap.emplace(weights.weights[static_cast<Eigen::Index>(k)], k, other);
        }
    };

    std::vector<std::size_t> tree;
    visit(inc.reference_position);
    while (!heap.empty() && tree.size() + 1 < inc.bus_count()) {
        const auto [w, k, bus] = heap.top();
        heap.pop();
        if (in_tree[bus]) continue;
        tree.push_back(k);
        visit(bus);
    }
    if (tree.size() + 1 != inc.bus_count()) throw ValidationError("network is disconnected; no spanning tree");
    std::sort(tree.begin(), tree.end());
    return tree;
}

MtdStrategy spanning_tree_strategy(const IncidenceModel& inc, const AdmittanceModel& adm,
                                   const WeightAssignment& weights, double alpha) {
    return MtdStrategy::scaled(minimum_spanning_tree(inc, weights), adm, alpha);
}

MtdStrategy spanning_tree_strategy(const GridCase& grid, WeightMode mode, double alpha) {
    const auto inc = build_incidence(grid);
    const auto adm = build_admittance(grid, inc);
    switch (mode) {
        case WeightMode::equal:
            return spanning_tree_strategy(inc, adm, WeightAssignment::equal(inc.branch_count()), alpha);
        case WeightMode::admittance_proportional:
            return spanning_tree_strategy(inc, adm, WeightAssignment::admittance_proportional(adm), alpha);
        case WeightMode::custom: break;
    }
    throw ValidationError("custom weights need an explicit weight vector");
}

bool connects_all_buses(const IncidenceModel& inc, const std::vector<std::size_t>& branches) {
    std::vector<std::vector<std::size_t>> adjacency(inc.bus_count());
    for (auto k : branches) {
        if (k >= inc.branch_count()) throw ValidationError("branch index " + std::to_string(k) + " out of range");
        adjacency[inc.from_of[k]].push_back(inc.to_of[k]);
        adjacency[inc.to_of[k]].push_back(inc.from_of[k]);
    }
    std::vector<bool> seen(inc.bus_count(), false);
    std::queue<std::size_t> frontier;
    frontier.push(inc.reference_position);
    seen[inc.reference_position] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (auto v : adjacency[u])
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                frontier.push(v);
            }
    }
    return reached == inc.bus_count();
}

bool is_protecting(const MtdStrategy& strategy, const IncidenceModel& inc) {
    return connects_all_buses(inc, strategy.protected_branches);
}

namespace {

using nlohmann::json;

std::size_t branch_from_number(long number, const IncidenceModel& inc) {
    if (number < 1) throw ValidationError("branch numbers are 1-based; got " + std::to_string(number));
    const auto row = static_cast<std::size_t>(number - 1);
    const auto it = std::find(inc.case_branch.begin(), inc.case_branch.end(), row);
    if (it == inc.case_branch.end())
        throw ValidationError("branch " + std::to_string(number) + " is not an in-service branch of the case");
    return static_cast<std::size_t>(it - inc.case_branch.begin());
}

}  // namespace

MtdStrategy read_strategy_json(std::string_view text, const IncidenceModel& inc) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("invalid strategy JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("protected") || !doc["protected"].is_array())
        throw ValidationError("strategy: field 'protected' must be an array");
    if (!doc.contains("delta_b") || !doc["delta_b"].is_object())
        throw ValidationError("strategy: field 'delta_b' must be an object");

    MtdStrategy s;
    for (const auto& item : doc["protected"]) {
        if (!item.is_number_integer()) throw ValidationError("strategy: field 'protected' must hold integers");
        s.protected_branches.push_back(branch_from_number(item.get<long>(), inc));
    }
    std::sort(s.protected_branches.begin(), s.protected_branches.end());
    if (std::adjacent_find(s.protected_branches.begin(), s.protected_branches.end()) != s.protected_branches.end())
        throw ValidationError("strategy: field 'protected' lists a branch twice");

    for (const auto& [key, value] : doc["delta_b"].items()) {
        long number = 0;
        try {
            std::size_t used = 0;
            number = std::stol(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ValidationError("strategy: field 'delta_b' key '" + key + "' is not a branch number");
        }
        if (!value.is_number()) throw ValidationError("strategy: field 'delta_b' values must be numbers");
        s.delta_b[branch_from_number(number, inc)] = value.get<double>();
    }
    for (auto k : s.protected_branches)
        if (!s.delta_b.contains(k))
            throw ValidationError("strategy: field 'delta_b' misses branch " + std::to_string(inc.case_branch[k] + 1));
    if (s.delta_b.size() != s.protected_branches.size())
        throw ValidationError("strategy: field 'delta_b' names an unprotected branch");
    return s;
}

std::string write_strategy_json(const MtdStrategy& strategy, const IncidenceModel& inc) {
    json doc;
    json protected_numbers = json::array();
    json deltas = json::object();
    for (auto k : strategy.protected_branches) {
        const auto number = inc.case_branch.at(k) + 1;
        protected_numbers.push_back(number);
        deltas[std::to_string(number)] = strategy.delta_b.at(k);
    }
    doc["protected"] = std::move(protected_numbers);
    doc["delta_b"] = std::move(deltas);
    return doc.dump(2) + "\n";
}

WeightAssignment read_weights_json(std::string_view text, std::size_t branch_count) {
    std::vector<double> values;
    try {
        values = json::parse(text).get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("weights: expected a JSON array of numbers: ") + e.what());
    }
    if (values.size() != branch_count)
        throw ValidationError("weights: expected " + std::to_string(branch_count) + " entries, found " +
                              std::to_string(values.size()));
    return WeightAssignment::custom(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

}  // namespace gridmtd
