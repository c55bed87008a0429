#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "flarelab/suspension.hpp"

using namespace flarelab;

TEST_CASE("a one-level window is the ball") {
    TrackMap f = testing::load_map("fib");
    TreeSpace T(f);
    ConedBall b = T.coned_ball(T.root(), 3);
    SuspensionWindow w = build_window(T, b, 2, 2);
    CHECK(w.levels() == 1);
    CHECK(w.per_level() == b.size());
    CHECK(w.vertical_edges == 0);
    DistanceTable fiber = ball_distances(T, w.ball, 0);
    auto d = suspension_distances(T, w, {0, 2});
    for (int v = 0; v < b.size(); ++v) CHECK(static_cast<double>(d[v]) == doctest::Approx(static_cast<double>(fiber.value[v])));
    CHECK_THROWS_AS(build_window(T, b, 3, 2), std::invalid_argument);
}

TEST_CASE("two vertical steps land on the image under the squared lift") {
    TrackMap f = testing::load_map("fib");
    TreeSpace T(f);
    SuspensionWindow w = build_window(T, T.coned_ball(T.root(), 5), 0, 2);
    int composed = 0;
    for (int v = 0; v < w.ball.num_tree; ++v) {
        const int once = w.image[v];
        if (once < 0 || w.image[once] < 0) continue;
        ++composed;
        REQUIRE(w.ball.points[w.image[once]] == T.lift_apply(T.lift_apply(w.ball.points[v])));
        // The direct vertical route costs 2 and nothing cheaper crosses two levels.
        REQUIRE(static_cast<double>(suspension_distance(T, w, {v, 0}, {w.image[once], 2})) == doctest::Approx(2.0));
    }
    CHECK(composed > 0);
    CHECK(w.escapes > 0);
    CHECK_THROWS_AS(build_window(T, T.coned_ball(T.root(), 5), 0, 2, true), truncation_error);
}

TEST_CASE("distances in the window") {
    TrackMap f = testing::load_map("geo");
    TreeSpace T(f);
    SuspensionWindow w = build_window(T, T.coned_ball(T.root(), 4), 0, 4);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> node(0, w.per_level() - 1), level(0, 4);
    for (int s = 0; s < 20; ++s) {
        SuspensionPoint x{node(rng), level(rng)};
        auto d = suspension_distances(T, w, x);
        CHECK(d[w.id(x)] == 0);
        DistanceTable fiber = ball_distances(T, w.ball, x.node);
        for (int k = 0; k < 100; ++k) {
            SuspensionPoint y{node(rng), level(rng)};
            REQUIRE(d[w.id(y)] + 1e-12 >= std::abs(x.level - y.level));
            if (y.level == x.level) REQUIRE(d[w.id(y)] <= fiber.value[y.node] + 1e-9);
        }
    }
    CHECK_THROWS_AS(suspension_distances(T, w, {0, 9}), std::out_of_range);
}

TEST_CASE("flaring of sections") {
    TrackMap fib = testing::load_map("fib");
    TreeSpace F(fib);
    SectionConfig c;
    c.R = 3;
    c.samples = 60;
    Flaring2Report r = verify_flaring2(F, c);
    CHECK(r.pairs + r.rejected == c.samples);
    CHECK(r.exact_pairs > 0);
    CHECK(r.max_step >= 1);
    REQUIRE(r.A2);
    Flaring2Report again = verify_flaring2(F, c);
    CHECK(again.A2 == r.A2);
    CHECK(again.violators == r.violators);

    // Exact orbits only.
    c.perturb_prob = 0;
    Flaring2Report exact = verify_flaring2(F, c);
    CHECK(exact.exact_pairs == exact.pairs);
    CHECK(exact.rejected == 0);
    CHECK(exact.A2);

    TrackMap id = testing::load_map("identity");
    TreeSpace I(id, 2);
    SectionConfig ci;
    ci.R = 2;
    ci.samples = 60;
    ci.start_radius = 2;
    Flaring2Report none = verify_flaring2(I, ci);
    CHECK(!none.A2);
    CHECK(!none.counterexamples.empty());

    c.nu2 = 1;
    CHECK_THROWS_AS(verify_flaring2(F, c), std::invalid_argument);
}
