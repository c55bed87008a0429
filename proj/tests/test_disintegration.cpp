#include "doctest.h"
#include "support.hpp"
#include "flarelab/disintegration.hpp"

using namespace flarelab;

namespace {

// Zero stratum z enveloped by the EG stratum {x, y}.
const char* kZeroFixture = R"({
  "version": 1,
  "meta": {"name": "zero", "base_vertex": "v", "ct_declared": true},
  "graph": {
    "vertices": ["v", "w"],
    "edges": [
      {"id": 1, "name": "a", "reverse": -1, "init": "v", "term": "v", "stratum": 1},
      {"id": 2, "name": "z", "reverse": -2, "init": "v", "term": "w", "stratum": 2},
      {"id": 3, "name": "x", "reverse": -3, "init": "w", "term": "w", "stratum": 3},
      {"id": 4, "name": "y", "reverse": -4, "init": "w", "term": "v", "stratum": 3}
    ]
  },
  "map": {
    "vertex_image": {"v": "v", "w": "v"},
    "edge_image": [
      {"edge": 1, "image": [1]}, {"edge": 2, "image": [1]},
      {"edge": 3, "image": [2, 3, 4]}, {"edge": 4, "image": [2, 3, 4, 1]}
    ]
  },
  "splittings": [
    {"edge": 1, "terms": [{"kind": "edge", "path": [1]}]},
    {"edge": 2, "terms": [{"kind": "edge", "path": [1]}]},
    {"edge": 3, "terms": [{"kind": "edge", "path": [2]}, {"kind": "edge", "path": [3]}, {"kind": "edge", "path": [4]}]},
    {"edge": 4, "terms": [{"kind": "edge", "path": [2]}, {"kind": "edge", "path": [3]}, {"kind": "edge", "path": [4]},
                          {"kind": "edge", "path": [1]}]}
  ]
})";

SplitTerm term(const MarkedGraph& g, SplitTerm::Kind k, std::vector<int> ids) {
    return {k, path_from_ids(g, ids)};
}

struct Window {
    Edge e_i, e_j;
    int p;
    bool operator==(const Window&) const = default;
};

// Maximal E_i w^p reverse(E_j) windows in an edge sequence, scanned directly.
std::vector<Window> qe_windows(const TrackMap& f, const EdgePath& path) {
    const MarkedGraph& g = f.graph();
    auto linear = [&](Edge e) -> const StratumInfo* {
        if (!g.is_positive(e)) return nullptr;
        const StratumInfo& s = f.stratum_info(g.stratum[e]);
        return s.kind == StratumKind::NegLinear ? &s : nullptr;
    };
    std::vector<Window> out;
    const auto& es = path.edges;
    for (std::size_t i = 0; i < es.size(); ++i) {
        const StratumInfo* li = linear(es[i]);
        if (!li) continue;
        const auto& w = li->twist_path.edges;
        const auto wbar = reverse(g, li->twist_path).edges;
        std::size_t k = i + 1;
        int p = 0;
        for (;;) {
            auto fits = [&](const std::vector<Edge>& u) {
                return k + u.size() <= es.size() && std::equal(u.begin(), u.end(), es.begin() + static_cast<long>(k));
            };
            if (fits(w) && p >= 0) {
                k += w.size();
                ++p;
            } else if (fits(wbar) && p <= 0) {
                k += w.size();
                --p;
            } else {
                break;
            }
        }
        if (p == 0 || k >= es.size()) continue;
        const Edge ej = g.rev[es[k]];
        const StratumInfo* lj = linear(ej);
        if (lj && ej != es[i] && lj->twist_path == li->twist_path) out.push_back({es[i], ej, std::abs(p)});
    }
    return out;
}

std::vector<BigInt> big(const Tuple& t) { return {t.begin(), t.end()}; }

}  // namespace

TEST_CASE("QE conglomeration") {
    TrackMap fib = testing::load_map("fib");
    const auto& fs = fib.rep().splittings.at(0);
    QESplitting plain = qe_splitting(fib, fs, fib.rep().edge_image[0]);
    REQUIRE(plain.terms.size() == fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) CHECK(plain.terms[k].kind == QETerm::Kind::Edge);

    TrackMap t = testing::load_map("tower_variant");
    const MarkedGraph& g = t.graph();
    using K = SplitTerm::Kind;
    std::vector<SplitTerm> terms{term(g, K::Edge, {2}), term(g, K::Nielsen, {1}), term(g, K::Nielsen, {1}),
                                 term(g, K::Edge, {-3})};
    QESplitting q = qe_splitting(t, terms);
    REQUIRE(q.terms.size() == 1);
    CHECK(q.terms[0].kind == QETerm::Kind::QE);
    CHECK(q.terms[0].p == 2);
    CHECK(g.label(q.terms[0].e_i) == "e1");
    CHECK(g.label(q.terms[0].e_j) == "e2");
    CHECK(path_ids(q.terms[0].path) == std::vector<int>{2, 1, 1, -3});

    std::vector<SplitTerm> bad{term(g, K::Edge, {2}), term(g, K::Nielsen, {4}), term(g, K::Edge, {-2})};
    CHECK_THROWS_AS(qe_splitting(t, bad), splitting_error);
}

TEST_CASE("declared splittings agree with a QE window scan") {
    for (const char* name : {"tower", "tower_variant"}) {
        CAPTURE(name);
        TrackMap f = testing::load_map(name);
        for (const auto& [e, terms] : f.rep().splittings) {
            const EdgePath& image = f.rep().edge_image[e];
            std::vector<Window> got;
            for (const QETerm& x : qe_splitting(f, terms, image).terms)
                if (x.kind == QETerm::Kind::QE) got.push_back({x.e_i, x.e_j, std::abs(x.p)});
            CHECK(got == qe_windows(f, image));
        }
    }
}

TEST_CASE("partitions and relations") {
    TrackMap fib = testing::load_map("fib");
    AlmostInvariantPartition P = almost_invariant_partition(fib);
    REQUIRE(P.S() == 1);
    CHECK(P.edges[0] == std::vector<Edge>{0, 2});
    CHECK(quasi_twist_triples(fib, P).empty());

    TrackMap tower = testing::load_map("tower");
    AlmostInvariantPartition T = almost_invariant_partition(tower);
    CHECK(T.S() == 2);
    CHECK(std::find(T.relation.begin(), T.relation.end(), std::make_pair(4, 2)) != T.relation.end());
    CHECK(T.home[1] == -1);

    TrackMap var = testing::load_map("tower_variant");
    AlmostInvariantPartition V = almost_invariant_partition(var);
    REQUIRE(V.S() == 3);
    auto triples = quasi_twist_triples(var, V);
    REQUIRE(triples.size() == 1);
    const QuasiTwistTriple& x = triples[0];
    CHECK(x.r == V.home[4]);
    CHECK(var.graph().label(x.e_i) == "e1");
    CHECK(var.graph().label(x.e_j) == "e2");
    CHECK(x.d_i == 1);
    CHECK(x.d_j == 2);
    CHECK(x.s == V.home[2]);
    CHECK(x.t == V.home[3]);
}

TEST_CASE("admissibility on the TOWER variant") {
    TrackMap f = testing::load_map("tower_variant");
    Disintegration D = disintegrate(f);
    REQUIRE(D.S() == 3);
    const QuasiTwistTriple& x = D.triples.at(0);
    CHECK(is_admissible(D, {1, 1, 1}).admissible);
    Tuple a(3), b(3);
    a[x.r] = 0, a[x.s] = 2, a[x.t] = 1;
    CHECK(is_admissible(D, a).admissible);
    b[x.r] = 0, b[x.s] = 1, b[x.t] = 0;
    AdmissibilityVerdict v = is_admissible(D, b);
    CHECK(!v.admissible);
    REQUIRE(v.violated);
    CHECK(*v.violated == x);
    CHECK(!is_admissible(D, {-1, 0, 0}).admissible);
    CHECK_THROWS_AS(is_admissible(D, {0, 2}), std::invalid_argument);

    // Brute force over small tuples against the raw relation.
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j)
            for (int k = 0; k <= 4; ++k) {
                Tuple t{i, j, k};
                bool raw = true;
                for (const auto& q : D.triples)
                    raw = raw && t[q.r] * (q.d_i - q.d_j) == t[q.s] * q.d_i - t[q.t] * q.d_j;
                REQUIRE(is_admissible(D, t).admissible == raw);
                REQUIRE(in_lattice(D, big(t)) == raw);
            }
}

TEST_CASE("admissible lattice") {
    TrackMap fib = testing::load_map("fib");
    Lattice L1 = admissible_lattice(disintegrate(fib));
    CHECK(L1.basis == std::vector<std::vector<BigInt>>{{1}});

    TrackMap tower = testing::load_map("tower");
    Lattice Lt = admissible_lattice(disintegrate(tower));
    CHECK(Lt.rank() == 2);

    TrackMap f = testing::load_map("tower_variant");
    Disintegration D = disintegrate(f);
    Lattice L = admissible_lattice(D);
    CHECK(L.rank() == 2);
    for (const auto& v : L.basis) {
        CHECK(in_lattice(D, v));
        auto [plus, minus] = as_difference(D, v);
        for (std::size_t k = 0; k < v.size(); ++k) {
            CHECK(plus[k] >= 0);
            CHECK(minus[k] >= 0);
            CHECK(plus[k] - minus[k] == v[k]);
        }
        CHECK(in_lattice(D, plus));
        CHECK(in_lattice(D, minus));
    }
}

TEST_CASE("f^a on edges") {
    TrackMap fib = testing::load_map("fib");
    Disintegration D = disintegrate(fib);
    TopRep id = build_f_a(D, {0});
    for (Edge e = 0; e < fib.graph().num_edges(); ++e) CHECK(id.edge_image[e].edges == std::vector<Edge>{e});
    CHECK(build_f_a(D, {1}).edge_image == fib.rep().edge_image);
    TopRep sq = build_f_a(D, {2});
    CHECK(path_ids(sq.edge_image[0]) == std::vector<int>{1, 2, 1});
    CHECK(path_ids(sq.edge_image[2]) == std::vector<int>{1, 2});

    SemigroupReport s = verify_semigroup_identity(D, {1}, {2});
    CHECK(s.holds);
    TopRep cube = build_f_a(D, {3});
    for (Edge e = 0; e < fib.graph().num_edges(); ++e) CHECK(cube.edge_image[e] == apply_map(fib.rep(), path_from_ids(fib.graph(), {MarkedGraph::signed_id(e)}), 3));

    TrackMap var = testing::load_map("tower_variant");
    Disintegration V = disintegrate(var);
    CHECK_THROWS_AS(build_f_a(V, {0, 1, 0}), std::invalid_argument);
}

TEST_CASE("semigroup identity over lattice members") {
    TrackMap f = testing::load_map("tower_variant");
    Disintegration D = disintegrate(f);
    Lattice L = admissible_lattice(D);
    auto nonneg = [&](const std::vector<BigInt>& v) {
        Tuple t;
        for (const auto& x : v) t.push_back(static_cast<long long>(x));
        return t;
    };
    for (const auto& a : L.basis)
        for (const auto& b : L.basis) CHECK(verify_semigroup_identity(D, nonneg(a), nonneg(b)).holds);
    CHECK(verify_semigroup_identity(D, {1, 1, 1}, {0, 0, 0}).holds);
}

TEST_CASE("coordinate homomorphism") {
    TrackMap f = testing::load_map("tower_variant");
    Disintegration D = disintegrate(f);
    CoordinateVector one = coordinate_hom(D, {1, 1, 1});
    for (std::size_t k = 0; k < one.strata.size(); ++k) {
        const StratumInfo& s = f.stratum_info(one.strata[k]);
        CHECK(one.omega[k] == (s.kind == StratumKind::EG ? 1 : s.twist_coefficient));
    }
    CoordinateVector zero = coordinate_hom(D, {0, 0, 0});
    for (const auto& x : zero.omega) CHECK(x == 0);
    Tuple a{1, 1, 1}, b(3);
    const auto& q = D.triples.at(0);
    b[q.r] = 0, b[q.s] = 2, b[q.t] = 1;
    Tuple ab{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
    CoordinateVector ca = coordinate_hom(D, a), cb = coordinate_hom(D, b), cab = coordinate_hom(D, ab);
    for (std::size_t k = 0; k < cab.omega.size(); ++k) CHECK(cab.omega[k] == ca.omega[k] + cb.omega[k]);
    CHECK(!(ca == cb));
    CHECK(coordinate_hom_lattice(D, big(ab)) == cab);
    CHECK_THROWS(coordinate_hom(D, {0, 1, 0}));
}

TEST_CASE("expansion factors follow the tuple") {
    TrackMap fib = testing::load_map("fib");
    Disintegration D = disintegrate(fib);
    for (const auto& r : expansion_consistency(D, {2})) {
        CHECK(r.observed == doctest::Approx(fib.lambda() * fib.lambda()).epsilon(1e-9));
        CHECK(r.rel_error <= 1e-6);
    }
}

TEST_CASE("zero strata need declared taken paths") {
    TrackMap bare(parse_document(kZeroFixture));
    CHECK_THROWS_AS(disintegrate(bare), splitting_error);

    auto doc = nlohmann::json::parse(kZeroFixture);
    doc["taken_paths"] = {{{"path", {2}}, {"terms", {{{"kind", "edge"}, {"path", {1}}}}}}};
    TrackMap taken(parse_document(doc.dump()));
    Disintegration D = disintegrate(taken);
    CHECK(D.S() == 1);
    CHECK(D.partition.home[2] == D.partition.home[3]);
    CHECK(is_admissible(D, {1}).admissible);
}
