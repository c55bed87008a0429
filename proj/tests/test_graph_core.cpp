#include "doctest.h"
#include "support.hpp"

using namespace flarelab;

TEST_CASE("tighten cancels inverse pairs") {
    MarkedGraph g = testing::rose(2);
    const Edge a = 0, A = 1, b = 2, B = 3;
    CHECK(tighten(g, {a, A}, 0).edges.empty());
    CHECK(tighten(g, {a, b, B, a}, 0).edges == std::vector<Edge>{a, a});
    CHECK(tighten(g, {}, 0).start == 0);
}

TEST_CASE("tighten agrees with the repeated-scan reduction") {
    MarkedGraph g = testing::rose(2);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 2000; ++k) {
        auto w = testing::random_walk(g, 30, rng);
        EdgePath t = tighten(g, w, 0);
        REQUIRE(t.edges == testing::repeated_scan(g, w));
        CHECK(is_tight(t, g));
    }
}

TEST_CASE("tighten rejects non-composable input") {
    MarkedGraph g = MarkedGraph::build({"p", "q"}, {{"a", 0, 1, 1}, {"b", 0, 1, 1}});
    CHECK_THROWS_AS(tighten(g, {0, 0}, 0), structural_error);
    CHECK_THROWS_AS(make_path(g, {0, 2}), structural_error);
}

TEST_CASE("cyclic_tighten") {
    MarkedGraph g = testing::rose(2);
    const Edge a = 0, A = 1, b = 2;
    CHECK(cyclic_tighten(g, {a, b, A}).edges == std::vector<Edge>{b});
    CHECK_THROWS_AS(cyclic_tighten(g, {a, A}), structural_error);

    std::mt19937_64 rng(5);
    for (int k = 0; k < 500; ++k) {
        std::vector<Edge> c;
        do c = testing::repeated_scan(g, testing::random_walk(g, 8, rng));
        while (c.empty() || g.rev[c.front()] == c.back());
        auto w = testing::random_walk(g, 6, rng);
        std::vector<Edge> conj = w;
        conj.insert(conj.end(), c.begin(), c.end());
        for (auto it = w.rbegin(); it != w.rend(); ++it) conj.push_back(g.rev[*it]);
        REQUIRE(cyclic_tighten(g, conj).edges == canonical_rotation(c));
    }
}

TEST_CASE("subgraph by stratum") {
    TopRep tower = testing::load_rep("tower");
    const MarkedGraph& g = tower.graph;
    CHECK(subgraph(g, 4) == g);
    CHECK(subgraph(g, 0).num_edges() == 0);
    MarkedGraph h = subgraph(g, 3);
    CHECK(h.names == std::vector<std::string>{"a", "a", "e1", "e1", "e2", "e2"});
    CHECK_THROWS_AS(subgraph(g, 5), structural_error);
}

TEST_CASE("validate_graph") {
    CHECK(validate_graph(testing::rose(2)).empty());

    MarkedGraph bad = MarkedGraph::build({"p", "q"}, {{"a", 0, 1, 1}, {"b", 1, 0, 1}});
    bad.init[1] = 0;  // reverse of a now starts where a starts
    auto v = validate_graph(bad);
    REQUIRE(!v.empty());
    for (const auto& x : v) CHECK(x.code == "endpoints");

    MarkedGraph two = MarkedGraph::build({"p", "q"}, {{"a", 0, 0, 1}, {"b", 1, 1, 1}});
    auto w = validate_graph(two);
    REQUIRE(w.size() == 1);
    CHECK(w[0].code == "connected");
}

TEST_CASE("tight path enumeration counts reduced words") {
    MarkedGraph g = testing::rose(2);
    long long n = 0;
    for_each_tight_path(g, 5, false, [&](const EdgePath& p) {
        CHECK(is_tight(p, g));
        ++n;
    });
    CHECK(n == 4 + 12 + 36 + 108 + 324);
}

TEST_CASE("signed ids and labels") {
    MarkedGraph g = testing::rose(2);
    CHECK(MarkedGraph::signed_id(3) == -2);
    CHECK(g.from_signed(-2) == 3);
    CHECK(g.label(3) == "~b");
    CHECK_THROWS_AS(g.from_signed(0), structural_error);
    EdgePath p = path_from_ids(g, {1, -2});
    CHECK(reverse(g, p).edges == std::vector<Edge>{2, 1});
    CHECK(path_ids(p) == std::vector<int>{1, -2});
}
