#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "flarelab/coned_tree.hpp"

using namespace flarelab;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

// Equality of T-vertices straight from the definition.
bool same_by_definition(const TrackMap& f, const EdgePath& p, const EdgePath& q) {
    EdgePath d = join(f.graph(), reverse(f.graph(), p), q);
    return std::all_of(d.edges.begin(), d.edges.end(), [&](Edge e) { return !f.in_top(e); });
}

}  // namespace

TEST_CASE("tree points collapse lower-stratum tails") {
    TrackMap f = testing::load_map("tower");
    TreeSpace T(f);
    const MarkedGraph& g = f.graph();
    EdgePath y = path_from_ids(g, {5});
    CHECK(T.tree_point(y) == T.tree_point(path_from_ids(g, {5, 2, 1, -2})));
    CHECK(!(T.tree_point(y) == T.tree_point(path_from_ids(g, {5, 4}))));
    CHECK(T.tree_point(path_from_ids(g, {1, 1}, 0)) == T.root());

    std::mt19937_64 rng(13);
    int equal = 0;
    for (int k = 0; k < 3000; ++k) {
        EdgePath p = random_tight_path(g, static_cast<int>(rng() % 6), rng, 0);
        EdgePath q = random_tight_path(g, static_cast<int>(rng() % 6), rng, 0);
        if (k % 3 == 0) {
            // Push q toward p: p followed by a random lower-stratum path.
            const auto& lower = T.lower_paths(p.end);
            q = join(g, p, lower[rng() % lower.size()]);
        }
        const bool want = same_by_definition(f, p, q);
        equal += want;
        REQUIRE(T.same_point(p, q) == want);
        REQUIRE((T.tree_point(p) == T.tree_point(q)) == want);
    }
    CHECK(equal > 500);
}

TEST_CASE("base vertex is required") {
    TopRep r = testing::load_rep("fib");
    r.base_vertex = -1;
    TrackMap f(r);
    CHECK_THROWS_AS(TreeSpace{f}, configuration_error);
}

TEST_CASE("geodesics and the action") {
    TrackMap f = testing::load_map("fib");
    TreeSpace T(f);
    const MarkedGraph& g = f.graph();
    TreePoint V = T.tree_point(path_from_ids(g, {1, 2, -1}));
    Geodesic d = T.tree_geodesic(V, V);
    CHECK(d.path.empty());
    CHECK(d.D_u == 0);
    CHECK(d.D_pf == 0);
    CHECK(T.act(degenerate_path(0), V) == V);
    CHECK(T.tree_edge_distance(T.root(), V) == 3);
}

TEST_CASE("without rho the coned distance is the tree distance") {
    TrackMap f = testing::load_map("fib");
    TreeSpace T(f);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 300; ++k) {
        TreePoint V = T.tree_point(random_tight_path(f.graph(), static_cast<int>(rng() % 7), rng, 0));
        TreePoint W = T.tree_point(random_tight_path(f.graph(), static_cast<int>(rng() % 7), rng, 0));
        ConeDistance c = T.cone_distance(V, W);
        REQUIRE(c.value == doctest::Approx(T.tree_geodesic(V, W).D_pf).epsilon(1e-12));
    }
}

TEST_CASE("coned balls") {
    TrackMap fib = testing::load_map("fib");
    TreeSpace F(fib);
    ConedBall zero = F.coned_ball(F.root(), 0);
    CHECK(zero.size() == 1);
    // Reduced words of length <= 3 in a rank-two free group.
    ConedBall three = F.coned_ball(F.root(), 3);
    long long words = 1;
    for_each_tight_path(fib.graph(), 3, false, [&](const EdgePath&) { ++words; });
    CHECK(three.num_tree == words);
    CHECK(three.num_cones == 0);

    TrackMap geo = testing::load_map("geo");
    TreeSpace G(geo);
    ConedBall b = G.coned_ball(G.root(), 4);
    CHECK(b.num_cones > 0);
    // Every vertex of the rose starts a copy of rho, so every tree node is coned.
    for (int v = 0; v < b.num_tree; ++v)
        REQUIRE(std::any_of(b.adj[v].begin(), b.adj[v].end(), [](const ConedBall::Arc& a) { return a.slot < 0; }));
    CHECK_THROWS_AS(G.coned_ball(G.root(), 10, 1000), truncation_error);
}

TEST_CASE("cone distance matches Dijkstra on an enclosing ball") {
    TrackMap f = testing::load_map("geo");
    TreeSpace T(f);
    ConedBall b = T.coned_ball(T.root(), 9);
    std::vector<int> inner;
    for (int v = 0; v < b.num_tree; ++v)
        if (b.depth[v] <= 3) inner.push_back(v);
    std::mt19937_64 rng(31);
    for (int s = 0; s < 8; ++s) {
        const int src = inner[rng() % inner.size()];
        std::vector<int> targets;
        for (int k = 0; k < 10; ++k) targets.push_back(inner[rng() % inner.size()]);
        DistanceTable dt = ball_distances(T, b, src, targets);
        for (int t : targets) {
            ConeDistance c = T.cone_distance(b.points[src], b.points[t]);
            ExactLength o = dt.at(t);
            REQUIRE(c.d_star == o);
            CHECK(c.value <= c.geodesic_bypass_bound + 1e-9);
        }
    }
}

TEST_CASE("the geodesic bypass sum is only an upper bound") {
    TrackMap f = testing::load_map("geo");
    TreeSpace T(f);
    TreePoint W = T.tree_point(path_from_ids(f.graph(), {2, 2, -1, -2, 1, 2, -1, -2}, T.base()));
    ConeDistance c = T.cone_distance(T.root(), W);
    CHECK(c.value == doctest::Approx(3 * kPhi + 3).epsilon(1e-12));
    CHECK(c.geodesic_bypass_bound == doctest::Approx(5 * kPhi + 3).epsilon(1e-12));
    REQUIRE(c.route.size() == 4);
    CHECK(c.route.back().via_cone);
}

TEST_CASE("hyperbolicity probe") {
    TrackMap fib = testing::load_map("fib");
    TreeSpace F(fib);
    CHECK(hyperbolicity_probe(F, F.coned_ball(F.root(), 1)).delta == 0);
    CHECK(hyperbolicity_probe(F, F.coned_ball(F.root(), 4), 20000).delta == 0);

    TrackMap geo = testing::load_map("geo");
    TreeSpace G(geo);
    HyperbolicityReport r4 = hyperbolicity_probe(G, G.coned_ball(G.root(), 4), 20000);
    HyperbolicityReport r6 = hyperbolicity_probe(G, G.coned_ball(G.root(), 6), 20000);
    CHECK(r4.delta <= r6.delta + 1e-12);
    CHECK(std::isfinite(r6.delta));
}

TEST_CASE("classification of elements") {
    TrackMap tower = testing::load_map("tower");
    TreeSpace TT(tower);
    CHECK(TT.classify_element(Circuit{{0}}).kind == ElementKind::Elliptic);

    TrackMap geo = testing::load_map("geo");
    TreeSpace G(geo);
    const auto& rho = geo.rho()->rho.edges;
    CHECK(G.classify_element(Circuit{rho}).kind == ElementKind::LoxNielsenAxis);
    std::vector<Edge> rr = rho;
    rr.insert(rr.end(), rho.begin(), rho.end());
    CHECK(G.classify_element(Circuit{rr}).kind == ElementKind::LoxNielsenAxis);
    CHECK(G.classify_element(Circuit{reverse(geo.graph(), geo.rho()->rho).edges}).kind ==
          ElementKind::LoxNielsenAxis);
    ElementClass e = G.classify_element(Circuit{{0, 2}}, 8);
    CHECK(e.kind == ElementKind::Loxodromic);
    CHECK(stable_growth_check(e).eta_hat > 0);
    CHECK_THROWS_AS(stable_growth_check(G.classify_element(Circuit{rho})), std::invalid_argument);

    TrackMap fib = testing::load_map("fib");
    TreeSpace F(fib);
    Circuit c{{0, 2}};
    ElementClass x = F.classify_element(c, 6);
    GrowthFit fit = stable_growth_check(x);
    const double len = fib.lpf(0) + fib.lpf(2);
    for (std::size_t k = 0; k < x.growth.size(); ++k) CHECK(x.growth[k] == doctest::Approx(k * len).epsilon(1e-9));
    CHECK(fit.eta_hat == doctest::Approx(len).epsilon(1e-9));
    CHECK(fit.kappa_hat == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("the lift is twisted equivariant") {
    for (const char* name : {"fib", "geo", "tower"}) {
        CAPTURE(name);
        TrackMap f = testing::load_map(name);
        TreeSpace T(f);
        const MarkedGraph& g = f.graph();
        std::mt19937_64 rng(19);
        for (int k = 0; k < 300; ++k) {
            EdgePath loop;
            do loop = random_tight_path(g, static_cast<int>(rng() % 5), rng, T.base());
            while (loop.end != T.base());
            TreePoint x = T.tree_point(random_tight_path(g, static_cast<int>(rng() % 5), rng, T.base()));
            REQUIRE(T.lift_apply(T.act(loop, x)) == T.act(T.phi(loop), T.lift_apply(x)));
        }
    }
}

TEST_CASE("the lift stretches u-legal geodesics by lambda") {
    TrackMap f = testing::load_map("fib");
    TreeSpace T(f);
    std::mt19937_64 rng(23);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
        TreePoint V = T.tree_point(random_tight_path(f.graph(), static_cast<int>(rng() % 5), rng, 0));
        TreePoint W = T.tree_point(random_tight_path(f.graph(), static_cast<int>(rng() % 5), rng, 0));
        Geodesic d = T.tree_geodesic(V, W);
        if (!is_u_legal(f, d.path)) continue;
        ++checked;
        Geodesic e = T.tree_geodesic(T.lift_apply(V), T.lift_apply(W));
        REQUIRE(e.D_pf == doctest::Approx(f.lambda() * d.D_pf).epsilon(1e-9));
    }
    CHECK(checked > 50);
}
