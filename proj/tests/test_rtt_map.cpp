#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace flarelab;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

// Cancellation between f(E) and f(E') maximized over composable tight pairs.
int bcc_oracle(const TopRep& f) {
    const MarkedGraph& g = f.graph;
    int best = 0;
    for (Edge e = 0; e < g.num_edges(); ++e)
        for (Edge e2 : g.out_edges(g.term[e])) {
            if (e2 == g.rev[e]) continue;
            std::vector<Edge> w = f.edge_image[e].edges;
            w.insert(w.end(), f.edge_image[e2].edges.begin(), f.edge_image[e2].edges.end());
            const int cut = static_cast<int>(w.size() - testing::repeated_scan(g, w).size()) / 2;
            best = std::max(best, cut);
        }
    return best;
}

}  // namespace

TEST_CASE("FIB transition matrix and spectrum") {
    TrackMap f = testing::load_map("fib");
    REQUIRE(f.strata().size() == 1);
    const StratumInfo& s = f.strata()[0];
    CHECK(s.kind == StratumKind::EG);
    CHECK(s.transition == Matrix{{1, 1}, {1, 0}});
    CHECK(f.lambda() == doctest::Approx(kPhi).epsilon(1e-12));
    CHECK(characteristic_polynomial(s.transition) == std::vector<long long>{1, -1, -1});
}

TEST_CASE("pf_spectrum") {
    PfResult one = pf_spectrum({{2}});
    CHECK(one.lambda == doctest::Approx(2.0));
    CHECK(one.vector == std::vector<double>{1.0});
    CHECK_THROWS_AS(pf_spectrum({{1, 0}, {0, 1}}), taxonomy_error);
    CHECK(pf_spectrum({{1, 1}, {1, 0}}).lambda == doctest::Approx(kPhi).epsilon(1e-12));
    CHECK(spectral_radius({{2, 5}, {0, 3}}) == doctest::Approx(3.0));
}

TEST_CASE("TOWER taxonomy") {
    TrackMap f = testing::load_map("tower");
    REQUIRE(f.strata().size() == 4);
    CHECK(f.strata()[0].kind == StratumKind::NegFixed);
    const StratumInfo& e1 = f.strata()[1];
    CHECK(e1.kind == StratumKind::NegLinear);
    CHECK(e1.twist_coefficient == 1);
    CHECK(path_ids(e1.twist_path) == std::vector<int>{1});
    CHECK(f.strata()[2].twist_coefficient == 2);
    CHECK(f.strata()[3].kind == StratumKind::EG);
}

TEST_CASE("irreducible stratum with spectral radius one is refused") {
    MarkedGraph g = testing::rose(2);
    TopRep r = TopRep::build(g, {0}, {path_from_ids(g, {2}), path_from_ids(g, {1})});
    CHECK_THROWS_AS(TrackMap{r}, taxonomy_error);
}

TEST_CASE("gates and illegal turns on FIB") {
    TrackMap f = testing::load_map("fib");
    const Edge a = 0, A = 1, b = 2, B = 3;
    CHECK(f.turns().df == std::vector<Edge>{a, B, a, A});
    CHECK(f.turns().illegal == std::vector<std::pair<Edge, Edge>>{{a, b}});
    CHECK(!is_u_legal(f, path_from_ids(f.graph(), {-1, 2})));
    CHECK(is_u_legal(f, path_from_ids(f.graph(), {2})));
    CHECK(illegal_turn_count(f, path_from_ids(f.graph(), {-1, 2, -1, 2})) == 2);
}

TEST_CASE("bounded cancellation and truncated images") {
    for (const char* name : {"fib", "fib2", "geo", "tower"}) {
        TrackMap f = testing::load_map(name);
        CHECK(f.bcc1() == bcc_oracle(f.rep()));
    }
    TrackMap f = testing::load_map("fib");
    EdgePath p = path_from_ids(f.graph(), {1, 2, 1, 2});
    CHECK(apply_map(f.rep(), p, 0) == p);
    EdgePath full = apply_map(f.rep(), p);
    const int c = f.bcc1();
    CHECK(apply_map_trunc(f.rep(), p, 1) == subpath(full, c, full.size() - c, f.graph()));
    CHECK(apply_map_trunc(f.rep(), path_from_ids(f.graph(), {2}), 1).empty());
}

TEST_CASE("apply_map iterates") {
    TrackMap f = testing::load_map("fib");
    EdgePath a = path_from_ids(f.graph(), {1});
    CHECK(path_ids(apply_map(f.rep(), a, 3)) == std::vector<int>{1, 2, 1, 1, 2});
    CHECK(apply_map(f.rep(), a, 3) == apply_map(f.rep(), apply_map(f.rep(), a, 2)));
}

TEST_CASE("verify_nielsen refusals") {
    TrackMap f = testing::load_map("fib");
    NielsenVerdict v = verify_nielsen(f, path_from_ids(f.graph(), {1}));
    CHECK(!v.certificate);
    CHECK(!v.refusal.empty());
    // Fixed with no illegal turn: a single fixed edge of a lower stratum.
    TrackMap t = testing::load_map("tower");
    CHECK(!verify_nielsen(t, path_from_ids(t.graph(), {1})).certificate);
}

TEST_CASE("Nielsen search on FIB2 matches an exhaustive fixed-path scan") {
    TrackMap f = testing::load_map("fib2");
    std::vector<EdgePath> oracle;
    for_each_tight_path(f.graph(), 10, false, [&](const EdgePath& p) {
        if (illegal_turn_count(f, p) == 1 && apply_map(f.rep(), p) == p) oracle.push_back(p);
    });
    auto found = search_nielsen(f, 10);
    REQUIRE(!found.empty());
    std::sort(oracle.begin(), oracle.end());
    for (const auto& p : found) CHECK(std::binary_search(oracle.begin(), oracle.end(), p));
    for (const auto& p : oracle) CHECK(verify_nielsen(f, p).certificate.has_value());
    REQUIRE(f.rho());
    CHECK(f.rho()->closed);
    CHECK(std::find(found.begin(), found.end(), f.rho()->rho) != found.end());
}

TEST_CASE("fixed circuits") {
    TrackMap t = testing::load_map("tower");
    FixedCircuitResult a = is_fixed_circuit(t, Circuit{{0}});
    CHECK(a.fixed);
    REQUIRE(a.decomposition);
    CHECK(a.decomposition->size() == 1);
    TrackMap fib = testing::load_map("fib");
    CHECK(!is_fixed_circuit(fib, Circuit{{0}}).fixed);
    TrackMap f2 = testing::load_map("fib2");
    CHECK(is_fixed_circuit(f2, Circuit{f2.rho()->rho.edges}).fixed);
}

TEST_CASE("eigenlengths satisfy the eigenvector equation") {
    for (const char* name : {"fib", "fib2", "geo", "tower"}) {
        TrackMap f = testing::load_map(name);
        for (Edge e = 0; e < f.graph().num_edges(); ++e) {
            if (!f.in_top(e)) {
                CHECK(f.lpf(e) == 0);
                continue;
            }
            const double img = eigenlength(f, f.rep().edge_image[e]);
            CHECK(std::abs(img - f.lambda() * f.lpf(e)) <= 1e-8 * f.lambda() * f.lpf(e));
        }
    }
}
