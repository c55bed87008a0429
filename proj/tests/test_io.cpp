#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace flarelab;
using nlohmann::json;

namespace {

json raw(const std::string& name) {
    std::ifstream in(testing::fixture_path(name));
    return json::parse(in);
}

}  // namespace

TEST_CASE("bundled FIB parses to one EG stratum") {
    TrackMap f = testing::load_map("fib");
    CHECK(f.graph().num_edges() == 4);
    REQUIRE(f.strata().size() == 1);
    CHECK(f.strata()[0].kind == StratumKind::EG);
    CHECK(f.rep().base_vertex == 0);
}

TEST_CASE("every bundled fixture loads") {
    for (const char* name : {"fib", "fib2", "geo", "tower", "tower_variant", "identity"}) {
        CAPTURE(name);
        CHECK_NOTHROW(testing::load_map(name));
    }
}

TEST_CASE("edge without a reverse partner is named") {
    json d = raw("fib");
    d["graph"]["edges"][1]["reverse"] = 7;
    try {
        parse_document(d.dump());
        FAIL("expected input_error");
    } catch (const input_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("/graph/edges/1") != std::string::npos);
    }
}

TEST_CASE("unknown keys: strict throws, lenient warns") {
    json d = raw("fib");
    d["meta"]["colour"] = "blue";
    CHECK_THROWS_AS(parse_document(d.dump()), input_error);
    std::vector<std::string> warnings;
    TopRep r = parse_document(d.dump(), false, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("colour") != std::string::npos);
    CHECK(fixture_hash(r) == fixture_hash(testing::load_rep("fib")));
}

TEST_CASE("syntax and version errors") {
    CHECK_THROWS_AS(parse_document("{\"version\": 1,"), input_error);
    json d = raw("fib");
    d["version"] = 2;
    CHECK_THROWS_AS(parse_document(d.dump()), input_error);
    CHECK_THROWS_AS(load_document("/nonexistent/fixture.json"), input_error);
}

TEST_CASE("round trip keeps the canonical form") {
    for (const char* name : {"fib", "fib2", "geo", "tower", "tower_variant", "identity"}) {
        CAPTURE(name);
        TopRep a = testing::load_rep(name);
        TopRep b = parse_document(serialize(a).dump());
        CHECK(canonical_text(a) == canonical_text(b));
        CHECK(fixture_hash(a) == fixture_hash(b));
        TopRep c = parse_document(serialize(b).dump(2));
        CHECK(canonical_text(b) == canonical_text(c));
        CHECK(b.graph == c.graph);
        CHECK(b.edge_image == c.edge_image);
    }
}

TEST_CASE("hash separates fixtures and ignores key order") {
    CHECK(fixture_hash(testing::load_rep("fib")) != fixture_hash(testing::load_rep("fib2")));
    CHECK(fixture_hash(testing::load_rep("tower")) != fixture_hash(testing::load_rep("tower_variant")));
    json d = raw("geo");
    json shuffled = json::object();
    for (auto it = d.rbegin(); it != d.rend(); ++it) shuffled[it.key()] = it.value();
    CHECK(fixture_hash(parse_document(shuffled.dump())) == fixture_hash(testing::load_rep("geo")));
    CHECK(fixture_hash(testing::load_rep("fib")).size() == 16);
}

TEST_CASE("bad map data is rejected") {
    json d = raw("fib");
    d["map"]["edge_image"][0]["image"] = json::array({1, -1, 2});
    CHECK_THROWS(TrackMap(parse_document(d.dump())));
    json e = raw("geo");
    e["nielsen"]["path"] = json::array({1, 2, 1});
    CHECK_THROWS_AS(TrackMap(parse_document(e.dump())), taxonomy_error);
}

TEST_CASE("parse_id_list") {
    CHECK(parse_id_list("1,-2, 3") == std::vector<int>{1, -2, 3});
    CHECK(parse_id_list("").empty());
    CHECK_THROWS(parse_id_list("1,x"));
}
