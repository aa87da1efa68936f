#include "gridmtd/case_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace gridmtd {

namespace {

using Row = std::vector<double>;

struct MatrixBlock {
    std::vector<Row> rows;
    std::vector<std::size_t> lines;  // 1-based source line of each row
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
    const auto pos = line.find('%');
    return pos == std::string_view::npos ? line : line.substr(0, pos);
}

double parse_number(std::string_view token, std::size_t line) {
    std::string buf(token);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || buf.empty())
        throw ParseError(line, "not a number: '" + buf + "'");
    return v;
}

Row parse_row(std::string_view body, std::size_t line) {
    Row row;
    std::size_t i = 0;
    while (i < body.size()) {
        while (i < body.size() && (body[i] == ' ' || body[i] == '\t' || body[i] == ',' || body[i] == '\r'))
            ++i;
        if (i >= body.size()) break;
        std::size_t j = i;
        while (j < body.size() && body[j] != ' ' && body[j] != '\t' && body[j] != ',' && body[j] != '\r')
            ++j;
        row.push_back(parse_number(body.substr(i, j - i), line));
        i = j;
    }
    return row;
}

// Returns the assignment target when `line` looks like `mpc.<name> = ...`.
std::string_view assignment_target(std::string_view line, std::string_view& rhs) {
    line = trim(line);
    if (line.rfind("mpc.", 0) != 0) return {};
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) return {};
    rhs = trim(line.substr(eq + 1));
    return trim(line.substr(4, eq - 4));
}

struct MatpowerSections {
    std::string name = "case";
    std::optional<double> base_mva;
    std::optional<MatrixBlock> bus;
    std::optional<MatrixBlock> branch;
};

MatpowerSections scan_matpower(std::string_view text) {
    MatpowerSections out;
    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start <= text.size();) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto code = trim(strip_comment(lines[i]));
        if (code.empty()) continue;

        if (code.rfind("function", 0) == 0) {
            const auto eq = code.find('=');
            if (eq != std::string_view::npos) {
                auto n = trim(code.substr(eq + 1));
                if (!n.empty()) out.name = std::string(n);
            }
            continue;
        }

        std::string_view rhs;
        const auto target = assignment_target(code, rhs);
        if (target.empty()) continue;

        if (target == "baseMVA") {
            auto value = rhs;
            if (!value.empty() && value.back() == ';') value.remove_suffix(1);
            out.base_mva = parse_number(trim(value), line_no);
            continue;
        }
        if (target != "bus" && target != "branch") continue;
        if (rhs.empty() || rhs.front() != '[')
            throw ParseError(line_no, "expected '[' after mpc." + std::string(target));

        MatrixBlock block;
        bool closed = false;
        std::string_view chunk = rhs.substr(1);
        std::size_t j = i;
        for (;;) {
            const auto close = chunk.find(']');
            auto body = close == std::string_view::npos ? chunk : chunk.substr(0, close);
            // Rows are separated by ';' or by line breaks.
            std::size_t s = 0;
            while (s <= body.size()) {
                auto semi = body.find(';', s);
                if (semi == std::string_view::npos) semi = body.size();
                auto piece = trim(body.substr(s, semi - s));
                if (!piece.empty()) {
                    block.rows.push_back(parse_row(piece, j + 1));
                    block.lines.push_back(j + 1);
                }
                s = semi + 1;
            }
            if (close != std::string_view::npos) {
                closed = true;
                break;
            }
            if (++j >= lines.size()) break;
            chunk = strip_comment(lines[j]);
        }
        if (!closed)
            throw ParseError(line_no, "unterminated matrix mpc." + std::string(target));
        i = j;

        if (!block.rows.empty()) {
            const auto width = block.rows.front().size();
            for (std::size_t r = 0; r < block.rows.size(); ++r)
                if (block.rows[r].size() != width)
                    throw ParseError(block.lines[r], "row has " + std::to_string(block.rows[r].size()) +
                                                         " columns, expected " + std::to_string(width));
        }
        (target == "bus" ? out.bus : out.branch) = std::move(block);
    }
    return out;
}

BusId as_bus_id(double v, std::size_t line) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e15)
        throw ParseError(line, "bus id must be a positive integer");
    return static_cast<BusId>(v);
}

}  // namespace

std::size_t GridCase::in_service_count() const {
    return static_cast<std::size_t>(
        std::count_if(branches.begin(), branches.end(), [](const Branch& b) { return b.in_service(); }));
}

void validate(const GridCase& grid) {
    if (grid.buses.empty()) throw ValidationError("case has no buses");

    std::unordered_map<BusId, std::size_t> position;
    for (std::size_t i = 0; i < grid.buses.size(); ++i)
        if (!position.emplace(grid.buses[i], i).second)
            throw ValidationError("duplicate bus id " + std::to_string(grid.buses[i]));

    if (!position.contains(grid.reference_bus))
        throw ValidationError("reference bus " + std::to_string(grid.reference_bus) + " is not a bus");

    std::vector<std::vector<std::size_t>> adjacency(grid.buses.size());
    for (std::size_t k = 0; k < grid.branches.size(); ++k) {
        const auto& br = grid.branches[k];
        const auto label = "branch " + std::to_string(k + 1);
        auto f = position.find(br.from_bus);
        auto t = position.find(br.to_bus);
        if (f == position.end()) throw ValidationError(label + ": unknown from bus " + std::to_string(br.from_bus));
        if (t == position.end()) throw ValidationError(label + ": unknown to bus " + std::to_string(br.to_bus));
        if (br.from_bus == br.to_bus) throw ValidationError(label + ": starts and ends at the same bus");
        if (!br.in_service()) continue;
        if (br.reactance == 0.0 || !std::isfinite(br.reactance))
            throw ValidationError(label + ": in-service branch needs a finite nonzero reactance");
        adjacency[f->second].push_back(t->second);
        adjacency[t->second].push_back(f->second);
    }

    std::vector<bool> seen(grid.buses.size(), false);
    std::queue<std::size_t> frontier;
    frontier.push(position.at(grid.reference_bus));
    seen[frontier.front()] = true;
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
    if (reached != grid.buses.size())
        throw ValidationError("in-service network is disconnected: " + std::to_string(reached) + " of " +
                              std::to_string(grid.buses.size()) + " buses reachable from the reference");
}

GridCase parse_matpower_case(std::string_view text) {
    auto sections = scan_matpower(text);
    if (!sections.base_mva) throw StructureError("missing mpc.baseMVA");
    if (!sections.bus) throw StructureError("missing mpc.bus matrix");
    if (!sections.branch) throw StructureError("missing mpc.branch matrix");
    if (sections.bus->rows.empty()) throw StructureError("mpc.bus matrix is empty");

    GridCase grid;
    grid.name = sections.name;
    grid.base_mva = *sections.base_mva;

    const auto& bus = *sections.bus;
    for (std::size_t r = 0; r < bus.rows.size(); ++r) {
        const auto& row = bus.rows[r];
        grid.buses.push_back(as_bus_id(row[0], bus.lines[r]));
        grid.bus_payload.emplace_back(row.begin() + 1, row.end());
    }

    const auto& branch = *sections.branch;
    for (std::size_t r = 0; r < branch.rows.size(); ++r) {
        const auto& row = branch.rows[r];
        if (row.size() < 11)
            throw ParseError(branch.lines[r], "branch row needs at least 11 columns, found " +
                                                  std::to_string(row.size()));
        Branch br;
        br.from_bus = as_bus_id(row[0], branch.lines[r]);
        br.to_bus = as_bus_id(row[1], branch.lines[r]);
        br.reactance = row[3];
        br.status = row[10] != 0.0 ? BranchStatus::in_service : BranchStatus::out_of_service;
        for (std::size_t c = 0; c < row.size(); ++c)
            if (c != 0 && c != 1 && c != 3 && c != 10) br.payload.push_back(row[c]);
        grid.branches.push_back(std::move(br));
    }

    grid.reference_bus = grid.buses.front();
    validate(grid);
    return grid;
}

namespace {

using nlohmann::json;

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + ": field '" + std::string(key) + "' has the wrong type");
    }
}

}  // namespace

GridCase load_native_case(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("case JSON must be an object");

    GridCase grid;
    grid.name = require<std::string>(doc, "name", "case");
    grid.base_mva = require<double>(doc, "base_mva", "case");
    grid.reference_bus = require<BusId>(doc, "reference_bus", "case");

    const auto buses = require<json>(doc, "buses", "case");
    if (!buses.is_array()) throw ValidationError("case: field 'buses' must be an array");
    for (const auto& b : buses) {
        if (!b.is_number_integer() || b.get<BusId>() < 1)
            throw ValidationError("case: field 'buses' must hold positive integers");
        grid.buses.push_back(b.get<BusId>());
    }
    if (doc.contains("bus_payload")) {
        try {
            grid.bus_payload = doc.at("bus_payload").get<std::vector<std::vector<double>>>();
        } catch (const json::exception&) {
            throw ValidationError("case: field 'bus_payload' must be an array of number arrays");
        }
        if (grid.bus_payload.size() != grid.buses.size())
            throw ValidationError("case: field 'bus_payload' must have one entry per bus");
    }

    const auto branches = require<json>(doc, "branches", "case");
    if (!branches.is_array()) throw ValidationError("case: field 'branches' must be an array");
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& item = branches[k];
        const auto where = "branches[" + std::to_string(k) + "]";
        Branch br;
        br.from_bus = require<BusId>(item, "from", where);
        br.to_bus = require<BusId>(item, "to", where);
        br.reactance = require<double>(item, "x", where);
        const auto status = require<json>(item, "status", where);
        if (status.is_boolean())
            br.status = status.get<bool>() ? BranchStatus::in_service : BranchStatus::out_of_service;
        else if (status.is_number())
            br.status = status.get<double>() != 0.0 ? BranchStatus::in_service : BranchStatus::out_of_service;
        else
            throw ValidationError(where + ": field 'status' must be 0/1 or a boolean");
        if (item.contains("payload")) {
            try {
                br.payload = item.at("payload").get<std::vector<double>>();
            } catch (const json::exception&) {
                throw ValidationError(where + ": field 'payload' must be an array of numbers");
            }
        }
        grid.branches.push_back(std::move(br));
    }

    validate(grid);
    return grid;
}

std::string export_native_case(const GridCase& grid) {
    json doc;
    doc["name"] = grid.name;
    doc["base_mva"] = grid.base_mva;
    doc["reference_bus"] = grid.reference_bus;
    doc["buses"] = grid.buses;
    if (!grid.bus_payload.empty()) doc["bus_payload"] = grid.bus_payload;
    json branches = json::array();
    for (const auto& br : grid.branches) {
        json item{{"from", br.from_bus}, {"to", br.to_bus}, {"x", br.reactance}, {"status", br.in_service() ? 1 : 0}};
        if (!br.payload.empty()) item["payload"] = br.payload;
        branches.push_back(std::move(item));
    }
    doc["branches"] = std::move(branches);
    return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

GridCase load_case_file(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    try {
        return path.extension() == ".m" ? parse_matpower_case(text) : load_native_case(text);
    } catch (const ValidationError& e) {
        throw ValidationError(path.filename().string() + ": " + e.what());
    }
}

}  // namespace gridmtd
