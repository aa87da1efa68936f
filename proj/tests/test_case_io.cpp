#include <string>

#include "doctest.h"
#include "gridmtd/case_io.hpp"
#include "test_support.hpp"

using namespace gridmtd;

namespace {

const char* kTinyMatpower = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	0	1	1.1	0.9;
	2	1	0	0	0	0	1	1	0	0	1	1.1	0.9;
	3	1	0	0	0	0	1	1	0	0	1	1.1	0.9;
];
mpc.branch = [
	1	2	0.01	0.1	0	0	0	0	0	0	1	-360	360;
	1	3	0.01	0.2	0	0	0	0	0	0	1	-360	360;
	2	3	0.01	0.25	0	0	0	0	0	0	1	-360	360;
];
)";

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("bundled IEEE cases parse with the expected sizes") {
    const auto c14 = test::load("case14.m");
    CHECK(c14.name == "case14");
    CHECK(c14.buses.size() == 14);
    CHECK(c14.branches.size() == 20);
    CHECK(c14.reference_bus == 1);
    CHECK(c14.base_mva == 100.0);

    const auto c30 = test::load("case30.m");
    CHECK(c30.buses.size() == 30);
    CHECK(c30.branches.size() == 41);

    CHECK(test::load("case57.m").branches.size() == 80);
    CHECK(test::load("case118.m").branches.size() == 186);
    CHECK(test::load("case300.m").branches.size() == 411);
}

TEST_CASE("branches keep file order") {
    const auto c14 = test::load("case14.m");
    CHECK(c14.branches[0].from_bus == 1);
    CHECK(c14.branches[0].to_bus == 2);
    CHECK(c14.branches[0].reactance == doctest::Approx(0.05917));
    CHECK(c14.branches[1].to_bus == 5);
    CHECK(c14.branches[2].from_bus == 2);
    CHECK(c14.branches[2].to_bus == 3);
    CHECK(c14.branches.back().from_bus == 13);
    CHECK(c14.branches.back().to_bus == 14);
}

TEST_CASE("parsing is deterministic") {
    const auto text = read_text_file(test::case_path("case30.m"));
    CHECK(parse_matpower_case(text) == parse_matpower_case(text));
}

TEST_CASE("toy native case") {
    const auto toy = test::load("toy3.json");
    CHECK(toy.buses == std::vector<BusId>{1, 2, 3});
    REQUIRE(toy.branches.size() == 3);
    CHECK(toy.branches[1].reactance == 0.5);
    CHECK(toy.reference_bus == 1);
}

TEST_CASE("native export round-trips a MATPOWER case field by field") {
    const auto original = test::load("case14.m");
    const auto reparsed = load_native_case(export_native_case(original));
    CHECK(reparsed.name == original.name);
    CHECK(reparsed.base_mva == original.base_mva);
    CHECK(reparsed.reference_bus == original.reference_bus);
    CHECK(reparsed.buses == original.buses);
    CHECK(reparsed.bus_payload == original.bus_payload);
    REQUIRE(reparsed.branches.size() == original.branches.size());
    for (std::size_t k = 0; k < original.branches.size(); ++k) CHECK(reparsed.branches[k] == original.branches[k]);
    CHECK(reparsed == original);
}

TEST_CASE("MATPOWER errors") {
    SUBCASE("zero reactance is a validation error") {
        const auto text = replace_once(kTinyMatpower, "0.01\t0.2\t", "0.01\t0\t");
        CHECK_THROWS_AS(parse_matpower_case(text), ValidationError);
    }
    SUBCASE("malformed row reports its line") {
        const auto text = replace_once(kTinyMatpower, "0.01\t0.25", "0.01\tabc");
        try {
            parse_matpower_case(text);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 12);
        }
    }
    SUBCASE("ragged row") {
        const auto text = replace_once(kTinyMatpower, "\t1\t-360\t360;\n\t2", "\t1\t-360;\n\t2");
        CHECK_THROWS_AS(parse_matpower_case(text), ParseError);
    }
    SUBCASE("missing branch section") {
        const auto cut = std::string(kTinyMatpower).substr(0, std::string(kTinyMatpower).find("mpc.branch"));
        CHECK_THROWS_AS(parse_matpower_case(cut), StructureError);
    }
    SUBCASE("missing baseMVA") {
        CHECK_THROWS_AS(parse_matpower_case(replace_once(kTinyMatpower, "mpc.baseMVA = 100;", "")), StructureError);
    }
    SUBCASE("duplicate bus id") {
        const auto text = replace_once(kTinyMatpower, "\t3\t1\t0", "\t2\t1\t0");
        CHECK_THROWS_WITH_AS(parse_matpower_case(text), doctest::Contains("duplicate bus"), ValidationError);
    }
    SUBCASE("unterminated matrix") {
        const auto text = std::string(kTinyMatpower).substr(0, std::string(kTinyMatpower).rfind("];"));
        CHECK_THROWS_AS(parse_matpower_case(text), ParseError);
    }
}

TEST_CASE("out-of-service branches are kept but flagged") {
    // Take branch 1-3 out; 1-2-3 stays connected.
    const auto text = replace_once(kTinyMatpower, "0.2\t0\t0\t0\t0\t0\t0\t1", "0.2\t0\t0\t0\t0\t0\t0\t0");
    const auto grid = parse_matpower_case(text);
    REQUIRE(grid.branches.size() == 3);
    CHECK_FALSE(grid.branches[1].in_service());
    CHECK(grid.in_service_count() == 2);
}

TEST_CASE("out-of-service branches may carry zero reactance") {
    auto text = replace_once(kTinyMatpower, "0.01\t0.2\t0\t0\t0\t0\t0\t0\t1", "0.01\t0\t0\t0\t0\t0\t0\t0\t0");
    CHECK_NOTHROW(parse_matpower_case(text));
}

TEST_CASE("validation rejects exactly the invariant violations") {
    GridCase ok;
    ok.name = "g";
    ok.buses = {1, 2, 3};
    ok.reference_bus = 1;
    ok.branches = {{1, 2, 0.1, BranchStatus::in_service, {}}, {2, 3, 0.1, BranchStatus::in_service, {}}};
    CHECK_NOTHROW(validate(ok));

    SUBCASE("parallel branches are fine") {
        auto g = ok;
        g.branches.push_back({1, 2, 0.3, BranchStatus::in_service, {}});
        CHECK_NOTHROW(validate(g));
    }
    SUBCASE("unknown endpoint") {
        auto g = ok;
        g.branches[1].to_bus = 9;
        CHECK_THROWS_AS(validate(g), ValidationError);
    }
    SUBCASE("self loop") {
        auto g = ok;
        g.branches[1].to_bus = 2;
        CHECK_THROWS_WITH_AS(validate(g), doctest::Contains("same bus"), ValidationError);
    }
    SUBCASE("zero in-service reactance") {
        auto g = ok;
        g.branches[0].reactance = 0.0;
        CHECK_THROWS_AS(validate(g), ValidationError);
    }
    SUBCASE("disconnected in-service graph") {
        auto g = ok;
        g.branches[1].status = BranchStatus::out_of_service;
        CHECK_THROWS_WITH_AS(validate(g), doctest::Contains("disconnected"), ValidationError);
    }
    SUBCASE("reference bus not a bus") {
        auto g = ok;
        g.reference_bus = 7;
        CHECK_THROWS_AS(validate(g), ValidationError);
    }
}

TEST_CASE("native JSON schema errors name the field") {
    const std::string good = R"({"name":"t","base_mva":100,"reference_bus":1,"buses":[1,2],
        "branches":[{"from":1,"to":2,"x":0.1,"status":1}]})";
    CHECK_NOTHROW(load_native_case(good));

    CHECK_THROWS_WITH_AS(load_native_case(replace_once(good, "\"reference_bus\":1", "\"reference_bus\":7")),
                         doctest::Contains("reference bus 7"), ValidationError);
    CHECK_THROWS_WITH_AS(load_native_case(replace_once(good, ",\"x\":0.1", "")), doctest::Contains("'x'"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(load_native_case(replace_once(good, "\"buses\":[1,2]", "\"buses\":\"12\"")),
                         doctest::Contains("'buses'"), ValidationError);
    CHECK_THROWS_WITH_AS(load_native_case(replace_once(good, "\"status\":1", "\"status\":\"on\"")),
                         doctest::Contains("'status'"), ValidationError);
    CHECK_THROWS_AS(load_native_case("{not json"), ValidationError);
}
