#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gridmtd/errors.hpp"

namespace gridmtd {

using BusId = long;

enum class BranchStatus { in_service, out_of_service };

struct Branch {
    BusId from_bus = 0;
    BusId to_bus = 0;
    double reactance = 0.0;  // p.u.
    BranchStatus status = BranchStatus::in_service;
    // Columns the DC model does not consume, kept verbatim for round-tripping.
    std::vector<double> payload;

    bool in_service() const { return status == BranchStatus::in_service; }
    bool operator==(const Branch&) const = default;
};

struct GridCase {
    std::string name;
    std::vector<BusId> buses;                  // file order
    std::vector<std::vector<double>> bus_payload;  // per bus, may be empty
    std::vector<Branch> branches;              // file order
    double base_mva = 100.0;
    BusId reference_bus = 0;

    std::size_t in_service_count() const;
    bool operator==(const GridCase&) const = default;
};

/// Throws ValidationError naming the first violated invariant:
/// unknown endpoint, self loop, zero in-service reactance, duplicate bus,
/// disconnected in-service graph, or a reference bus that is not a bus.
void validate(const GridCase& grid);

/// Reads the MATPOWER case subset: baseMVA, bus column 1, branch columns
/// 1, 2, 4 and 11. The reference bus is the first listed bus.
GridCase parse_matpower_case(std::string_view text);

GridCase load_native_case(std::string_view text);
std::string export_native_case(const GridCase& grid);

/// Dispatches on extension: `.m` is MATPOWER, anything else native JSON.
GridCase load_case_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace gridmtd
