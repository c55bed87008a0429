#include "flarelab/disintegration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace flarelab {

const char* qe_kind_name(QETerm::Kind k) {
    switch (k) {
        case QETerm::Kind::Edge: return "edge";
        case QETerm::Kind::Nielsen: return "nielsen";
        case QETerm::Kind::Exceptional: return "exceptional";
        case QETerm::Kind::Zero: return "zero";
        case QETerm::Kind::QE: return "qe";
    }
    return "?";
}

namespace {

const StratumInfo* linear_info(const TrackMap& f, Edge e) {
    if (!f.graph().is_positive(e)) return nullptr;
    const StratumInfo& s = f.stratum_info(f.graph().stratum[e]);
    return s.kind == StratumKind::NegLinear ? &s : nullptr;
}

EdgePath power(const MarkedGraph& g, const EdgePath& w, int k) {
    std::vector<Edge> seq;
    for (int t = 0; t < k; ++t) seq.insert(seq.end(), w.edges.begin(), w.edges.end());
    return tighten(g, seq, w.start);
}

// k != 0 with u = [w^k], or 0.
int w_power(const MarkedGraph& g, const EdgePath& u, const EdgePath& w) {
    if (u.empty() || w.empty()) return 0;
    const EdgePath ur = reverse(g, u);
    for (int k = 1;; ++k) {
        EdgePath p = power(g, w, k);
        if (p.size() > u.size() || p.empty()) return 0;
        if (p == u) return k;
        if (p == ur) return -k;
    }
}

// Exponent of a term read as a power of w, or 0.
int term_power(const TrackMap& f, const SplitTerm& t, const EdgePath& w) {
    if (t.kind != SplitTerm::Kind::Nielsen && t.kind != SplitTerm::Kind::Edge) return 0;
    if (t.kind == SplitTerm::Kind::Edge && t.path != w && t.path != reverse(f.graph(), w)) return 0;
    return w_power(f.graph(), t.path, w);
}

std::string describe(const TrackMap& f, const SplitTerm& t) {
    std::string s = std::string(term_kind_name(t.kind)) + " [";
    for (std::size_t k = 0; k < t.path.size(); ++k) s += (k ? " " : "") + f.graph().label(t.path.edges[k]);
    return s + "]";
}

// (e_i, e_j, p) when path is e_i [w^p] reverse(e_j) over linear edges with a
// common twist path.
std::optional<std::tuple<Edge, Edge, int>> exceptional_shape(const TrackMap& f, const EdgePath& path) {
    const MarkedGraph& g = f.graph();
    if (path.size() < 3) return std::nullopt;
    const Edge ei = path.edges.front(), ej = g.rev[path.edges.back()];
    const StratumInfo* li = linear_info(f, ei);
    const StratumInfo* lj = linear_info(f, ej);
    if (!li || !lj || ei == ej || li->twist_path != lj->twist_path) return std::nullopt;
    EdgePath mid = subpath(path, 1, path.size() - 1, g);
    int p = w_power(g, mid, li->twist_path);
    if (p == 0) return std::nullopt;
    return std::make_tuple(ei, ej, p);
}

}  // namespace

void validate_terms(const TrackMap& f, const std::vector<SplitTerm>& terms, const std::optional<EdgePath>& target,
                    const std::string& who) {
    const MarkedGraph& g = f.graph();
    if (terms.empty()) throw splitting_error(who + ": no terms");
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const SplitTerm& t = terms[k];
        auto fail = [&](const std::string& why) {
            throw splitting_error(who + ", term " + std::to_string(k) + " (" + describe(f, t) + "): " + why);
        };
        if (t.path.empty()) fail("empty term");
        switch (t.kind) {
            case SplitTerm::Kind::Edge:
                if (t.path.size() != 1) fail("an edge term has exactly one edge");
                break;
            case SplitTerm::Kind::Nielsen:
                if (apply_map(f.rep(), t.path, 1) != t.path) fail("not fixed by f_#");
                break;
            case SplitTerm::Kind::Exceptional:
                if (!exceptional_shape(f, t.path)) fail("not of the form E_i w^p reverse(E_j) over linear edges");
                break;
            case SplitTerm::Kind::Zero: {
                for (Edge e : t.path.edges)
                    if (f.stratum_info(g.stratum[e]).kind != StratumKind::Zero) fail("leaves the zero strata");
                const auto& tp = f.rep().taken_paths;
                const EdgePath rev = reverse(g, t.path);
                if (std::none_of(tp.begin(), tp.end(), [&](const TakenPath& x) { return x.path == t.path || x.path == rev; }))
                    fail("not a declared taken path");
                break;
            }
        }
    }
    EdgePath whole = terms.front().path;
    for (std::size_t k = 1; k < terms.size(); ++k) {
        if (whole.end != terms[k].path.start)
            throw splitting_error(who + ", term " + std::to_string(k) + ": does not start where term " +
                                  std::to_string(k - 1) + " ends");
        whole = concat(whole, terms[k].path);
    }
    if (!is_tight(whole, g)) throw splitting_error(who + ": terms do not concatenate to a tight path");
    if (target && whole != *target) throw splitting_error(who + ": terms do not concatenate to the split path");
}

QESplitting qe_splitting(const TrackMap& f, const std::vector<SplitTerm>& terms, const std::optional<EdgePath>& target,
                         const std::string& who) {
    validate_terms(f, terms, target, who);
    const MarkedGraph& g = f.graph();
    QESplitting out;
    auto plain = [&](const SplitTerm& t) {
        QETerm q;
        q.path = t.path;
        switch (t.kind) {
            case SplitTerm::Kind::Edge: q.kind = QETerm::Kind::Edge; break;
            case SplitTerm::Kind::Nielsen: q.kind = QETerm::Kind::Nielsen; break;
            case SplitTerm::Kind::Zero: q.kind = QETerm::Kind::Zero; break;
            case SplitTerm::Kind::Exceptional: {
                q.kind = QETerm::Kind::Exceptional;
                auto [ei, ej, p] = *exceptional_shape(f, t.path);
                q.e_i = ei;
                q.e_j = ej;
                q.p = p;
                break;
            }
        }
        return q;
    };
    std::size_t k = 0;
    while (k < terms.size()) {
        const SplitTerm& t = terms[k];
        const StratumInfo* li = t.kind == SplitTerm::Kind::Edge ? linear_info(f, t.path.edges.front()) : nullptr;
        if (li) {
            const EdgePath& w = li->twist_path;
            std::size_t j = k + 1;
            int p = 0;
            for (; j < terms.size(); ++j) {
                int x = term_power(f, terms[j], w);
                if (x == 0) break;
                p += x;
            }
            if (j > k + 1 && j < terms.size() && p != 0 && terms[j].kind == SplitTerm::Kind::Edge) {
                const Edge ej = g.rev[terms[j].path.edges.front()];
                const StratumInfo* lj = linear_info(f, ej);
                if (lj && ej != t.path.edges.front() && lj->twist_path == w) {
                    QETerm q;
                    q.kind = QETerm::Kind::QE;
                    q.path = t.path;
                    for (std::size_t m = k + 1; m <= j; ++m) q.path = concat(q.path, terms[m].path);
                    q.e_i = t.path.edges.front();
                    q.e_j = ej;
                    q.p = p;
                    out.terms.push_back(std::move(q));
                    k = j + 1;
                    continue;
                }
            }
        }
        out.terms.push_back(plain(t));
        ++k;
    }
    return out;
}

namespace {

bool non_fixed(StratumKind k) {
    return k == StratumKind::EG || k == StratumKind::NegLinear || k == StratumKind::NegSuperlinear;
}

// Index of the first nonzero stratum above a zero stratum.
int envelope_of(const TrackMap& f, int z) {
    for (const auto& s : f.strata())
        if (s.index > z && s.kind != StratumKind::Zero) return s.index;
    return -1;
}

struct ShortPath {
    int stratum;
    EdgePath path;
    const std::vector<SplitTerm>* terms;
    std::string who;
};

std::vector<ShortPath> short_paths(const TrackMap& f) {
    const MarkedGraph& g = f.graph();
    const TopRep& r = f.rep();
    std::vector<ShortPath> out;
    for (const auto& s : f.strata()) {
        if (!non_fixed(s.kind)) continue;
        for (Edge e : s.edges) {
            auto it = r.splittings.find(e);
            if (it == r.splittings.end())
                throw splitting_error("no declared splitting for f(" + g.label(e) + ")");
            out.push_back({s.index, make_path(g, {e}), &it->second, "splitting of f(" + g.label(e) + ")"});
        }
        if (s.kind != StratumKind::EG) continue;
        for (const auto& z : f.strata()) {
            if (z.kind != StratumKind::Zero || envelope_of(f, z.index) != s.index) continue;
            bool any = false;
            for (const auto& tp : r.taken_paths) {
                if (std::none_of(tp.path.edges.begin(), tp.path.edges.end(),
                                 [&](Edge e) { return g.stratum[e] == z.index; }))
                    continue;
                any = true;
                out.push_back({s.index, tp.path, &tp.image_terms, "splitting of a taken path image"});
            }
            if (!any)
                throw splitting_error("zero stratum " + std::to_string(z.index) +
                                      " has no declared taken paths; short paths are ambiguous");
        }
    }
    return out;
}

}  // namespace

AlmostInvariantPartition almost_invariant_partition(const TrackMap& f) {
    const MarkedGraph& g = f.graph();
    const int u = static_cast<int>(f.strata().size());
    AlmostInvariantPartition P;
    std::set<std::pair<int, int>> rel;
    for (const ShortPath& sp : short_paths(f)) {
        EdgePath image = apply_map(f.rep(), sp.path, 1);
        QESplitting q = qe_splitting(f, *sp.terms, image, sp.who);
        for (const QETerm& t : q.terms) {
            if (t.kind != QETerm::Kind::Edge) continue;
            const int j = g.stratum[t.path.edges.front()];
            if (j != sp.stratum && non_fixed(f.stratum_info(j).kind)) rel.insert({sp.stratum, j});
        }
    }
    P.relation.assign(rel.begin(), rel.end());

    std::vector<int> uf(u + 1);
    std::iota(uf.begin(), uf.end(), 0);
    std::function<int(int)> root = [&](int x) { return uf[x] == x ? x : uf[x] = root(uf[x]); };
    for (auto [i, j] : P.relation) uf[root(i)] = root(j);

    std::map<int, std::vector<int>> groups;
    for (const auto& s : f.strata())
        if (non_fixed(s.kind)) groups[root(s.index)].push_back(s.index);
    for (const auto& s : f.strata())
        if (s.kind == StratumKind::Zero) groups[root(envelope_of(f, s.index))].push_back(s.index);
    std::vector<std::vector<int>> comps;
    for (auto& [k, v] : groups) {
        std::sort(v.begin(), v.end());
        comps.push_back(v);
    }
    std::sort(comps.begin(), comps.end(), [&](const auto& a, const auto& b) {
        const bool ta = std::count(a.begin(), a.end(), f.top()) > 0;
        const bool tb = std::count(b.begin(), b.end(), f.top()) > 0;
        if (ta != tb) return ta;
        return a.back() < b.back();
    });
    P.components = comps;
    P.home.assign(u + 1, -1);
    for (int c = 0; c < P.S(); ++c) {
        std::vector<Edge> es;
        for (int i : comps[c]) {
            P.home[i] = c;
            const auto& e = f.stratum_info(i).edges;
            es.insert(es.end(), e.begin(), e.end());
        }
        std::sort(es.begin(), es.end());
        P.edges.push_back(es);
    }
    return P;
}

std::vector<QuasiTwistTriple> quasi_twist_triples(const TrackMap& f, const AlmostInvariantPartition& P) {
    const MarkedGraph& g = f.graph();
    std::map<std::tuple<int, Edge, Edge>, QuasiTwistTriple> found;
    for (const ShortPath& sp : short_paths(f)) {
        EdgePath image = apply_map(f.rep(), sp.path, 1);
        for (const QETerm& t : qe_splitting(f, *sp.terms, image, sp.who).terms) {
            if (t.kind != QETerm::Kind::QE && t.kind != QETerm::Kind::Exceptional) continue;
            QuasiTwistTriple x;
            x.r = P.home[sp.stratum];
            x.e_i = std::min(t.e_i, t.e_j);
            x.e_j = std::max(t.e_i, t.e_j);
            x.d_i = f.stratum_info(g.stratum[x.e_i]).twist_coefficient;
            x.d_j = f.stratum_info(g.stratum[x.e_j]).twist_coefficient;
            x.s = P.home[g.stratum[x.e_i]];
            x.t = P.home[g.stratum[x.e_j]];
            x.p = std::abs(t.p);
            found.emplace(std::make_tuple(x.r, x.e_i, x.e_j), x);
        }
    }
    std::vector<QuasiTwistTriple> out;
    for (auto& [k, v] : found) out.push_back(v);
    return out;
}

Disintegration disintegrate(const TrackMap& f) {
    Disintegration D;
    D.f = &f;
    D.partition = almost_invariant_partition(f);
    D.triples = quasi_twist_triples(f, D.partition);
    for (const auto& t : D.triples) {
        std::vector<BigInt> row(D.S(), 0);
        row[t.r] += t.d_i - t.d_j;
        row[t.s] -= t.d_i;
        row[t.t] += t.d_j;
        D.relations.push_back(std::move(row));
    }
    return D;
}

namespace {

std::vector<BigInt> widen(const Tuple& a) { return std::vector<BigInt>(a.begin(), a.end()); }

BigInt dot(const std::vector<BigInt>& r, const std::vector<BigInt>& a) {
    BigInt s = 0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * a[k];
    return s;
}

}  // namespace

bool in_lattice(const Disintegration& D, const std::vector<BigInt>& a) {
    if (static_cast<int>(a.size()) != D.S()) throw std::invalid_argument("lattice vector has the wrong length");
    return std::all_of(D.relations.begin(), D.relations.end(), [&](const auto& r) { return dot(r, a) == 0; });
}

AdmissibilityVerdict is_admissible(const Disintegration& D, const Tuple& a) {
    if (static_cast<int>(a.size()) != D.S())
        throw std::invalid_argument("tuple has length " + std::to_string(a.size()) + ", expected S = " +
                                    std::to_string(D.S()));
    AdmissibilityVerdict v;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] < 0) {
            v.reason = "entry " + std::to_string(k) + " is negative";
            return v;
        }
    const MarkedGraph& g = D.f->graph();
    for (const auto& t : D.triples) {
        const BigInt lhs = BigInt(a[t.r]) * (t.d_i - t.d_j);
        const BigInt rhs = BigInt(a[t.s]) * t.d_i - BigInt(a[t.t]) * t.d_j;
        if (lhs != rhs) {
            v.violated = t;
            v.reason = "triple (X" + std::to_string(t.r + 1) + ", " + g.label(t.e_i) + ", " + g.label(t.e_j) +
                       "): a_r(d_i - d_j) = " + lhs.str() + " but a_s d_i - a_t d_j = " + rhs.str();
            return v;
        }
    }
    v.admissible = true;
    return v;
}

Lattice admissible_lattice(const Disintegration& D) {
    const int S = D.S();
    const int m = static_cast<int>(D.relations.size());
    std::vector<std::vector<BigInt>> M = D.relations;
    std::vector<std::vector<BigInt>> U(S, std::vector<BigInt>(S, 0));
    for (int k = 0; k < S; ++k) U[k][k] = 1;
    // Column operations: col_x -= q col_y, applied to M and U alike.
    auto axpy = [&](int x, int y, const BigInt& q) {
        for (int i = 0; i < m; ++i) M[i][x] -= q * M[i][y];
        for (int i = 0; i < S; ++i) U[i][x] -= q * U[i][y];
    };
    auto swap_cols = [&](int x, int y) {
        for (int i = 0; i < m; ++i) std::swap(M[i][x], M[i][y]);
        for (int i = 0; i < S; ++i) std::swap(U[i][x], U[i][y]);
    };
    int piv = 0;
    for (int i = 0; i < m && piv < S; ++i) {
        for (int j = piv + 1; j < S; ++j) {
            while (M[i][j] != 0) {
                axpy(piv, j, M[i][piv] / M[i][j]);
                swap_cols(piv, j);
            }
        }
        if (M[i][piv] != 0) ++piv;
    }
    Lattice L;
    for (int c = piv; c < S; ++c) {
        std::vector<BigInt> v(S);
        for (int i = 0; i < S; ++i) v[i] = U[i][c];
        L.basis.push_back(std::move(v));
    }
    // Hermite normal form of the basis rows.
    auto& B = L.basis;
    const int k = static_cast<int>(B.size());
    int r = 0;
    for (int c = 0; c < S && r < k; ++c) {
        for (int i = r + 1; i < k; ++i) {
            while (B[i][c] != 0) {
                BigInt q = B[r][c] / B[i][c];
                for (int x = 0; x < S; ++x) B[r][x] -= q * B[i][x];
                std::swap(B[r], B[i]);
            }
        }
        if (B[r][c] == 0) continue;
        if (B[r][c] < 0)
            for (auto& x : B[r]) x = -x;
        for (int i = 0; i < r; ++i) {
            BigInt q = B[i][c] / B[r][c];
            if (B[i][c] - q * B[r][c] < 0) q -= 1;
            for (int x = 0; x < S; ++x) B[i][x] -= q * B[r][x];
        }
        ++r;
    }
    return L;
}

std::pair<std::vector<BigInt>, std::vector<BigInt>> as_difference(const Disintegration& D, const std::vector<BigInt>& v) {
    if (!in_lattice(D, v)) throw std::invalid_argument("vector is not in the lattice");
    BigInt k = 0;
    for (const auto& x : v) k = std::max(k, BigInt(-x));
    std::vector<BigInt> plus(v.size()), minus(v.size(), k);
    for (std::size_t i = 0; i < v.size(); ++i) plus[i] = v[i] + k;
    return {plus, minus};
}

TopRep build_f_a(const Disintegration& D, const Tuple& a) {
    AdmissibilityVerdict v = is_admissible(D, a);
    if (!v.admissible) throw std::invalid_argument("inadmissible tuple: " + v.reason);
    const TrackMap& f = *D.f;
    const MarkedGraph& g = f.graph();
    std::vector<EdgePath> images;
    std::vector<int> vi(g.num_vertices(), -1);
    for (Edge e = 0; e < g.num_edges(); e += 2) {
        const int home = D.partition.home[g.stratum[e]];
        const int k = home < 0 ? 0 : static_cast<int>(a[home]);
        EdgePath im = apply_map(f.rep(), make_path(g, {e}), k);
        for (auto [vx, to] : {std::pair{g.init[e], im.start}, std::pair{g.term[e], im.end}}) {
            if (vi[vx] >= 0 && vi[vx] != to)
                throw std::logic_error("f^a has no consistent image for vertex " + g.vertex_names[vx]);
            vi[vx] = to;
        }
        images.push_back(std::move(im));
    }
    for (int x = 0; x < g.num_vertices(); ++x)
        if (vi[x] < 0) vi[x] = f.rep().vertex_image[x];
    TopRep out = TopRep::build(g, vi, images);
    out.base_vertex = f.rep().base_vertex;
    out.name = f.rep().name + "^a";
    if (f.rep().nielsen && apply_map(out, f.rep().nielsen->path, 1) == f.rep().nielsen->path)
        out.nielsen = f.rep().nielsen;
    for (Edge e = 0; e < g.num_edges(); ++e)
        for (Edge x : out.edge_image[e].edges)
            if (g.stratum[x] > g.stratum[e])
                throw std::logic_error("f^a does not preserve the filtration at " + g.label(e));
    return out;
}

SemigroupReport verify_semigroup_identity(const Disintegration& D, const Tuple& a, const Tuple& b) {
    if (a.size() != b.size()) throw std::invalid_argument("tuples differ in length");
    Tuple ab(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) ab[k] = a[k] + b[k];
    TopRep fa = build_f_a(D, a), fb = build_f_a(D, b), fab = build_f_a(D, ab);
    const MarkedGraph& g = D.f->graph();
    SemigroupReport rep;
    for (Edge e = 0; e < g.num_edges(); e += 2) {
        ++rep.edges_checked;
        EdgePath lhs = apply_map(fa, fb.edge_image[e], 1);
        if (lhs != fab.edge_image[e]) {
            rep.holds = false;
            rep.failures.push_back(e);
        }
    }
    return rep;
}

bool CoordinateVector::operator==(const CoordinateVector& o) const {
    if (strata != o.strata || omega != o.omega || differences.size() != o.differences.size()) return false;
    for (std::size_t k = 0; k < differences.size(); ++k)
        if (differences[k].i != o.differences[k].i || differences[k].j != o.differences[k].j ||
            differences[k].value != o.differences[k].value)
            return false;
    return true;
}

CoordinateVector coordinate_hom_lattice(const Disintegration& D, const std::vector<BigInt>& a) {
    if (!in_lattice(D, a)) throw std::invalid_argument("vector is not in the lattice");
    const TrackMap& f = *D.f;
    CoordinateVector c;
    std::vector<const StratumInfo*> linear;
    for (const auto& s : f.strata()) {
        if (s.kind != StratumKind::EG && s.kind != StratumKind::NegLinear) continue;
        const BigInt& as = a[D.partition.home[s.index]];
        c.strata.push_back(s.index);
        c.omega.push_back(s.kind == StratumKind::EG ? as : as * s.twist_coefficient);
        if (s.kind == StratumKind::NegLinear) linear.push_back(&s);
    }
    auto omega_of = [&](int idx) {
        return c.omega[std::find(c.strata.begin(), c.strata.end(), idx) - c.strata.begin()];
    };
    for (std::size_t x = 0; x < linear.size(); ++x)
        for (std::size_t y = x + 1; y < linear.size(); ++y)
            if (linear[x]->twist_path == linear[y]->twist_path)
                c.differences.push_back(
                    {linear[x]->index, linear[y]->index, omega_of(linear[x]->index) - omega_of(linear[y]->index)});
    return c;
}

CoordinateVector coordinate_hom(const Disintegration& D, const Tuple& a) {
    AdmissibilityVerdict v = is_admissible(D, a);
    if (!v.admissible) throw std::invalid_argument("inadmissible tuple: " + v.reason);
    return coordinate_hom_lattice(D, widen(a));
}

std::vector<ExpansionRow> expansion_consistency(const Disintegration& D, const Tuple& a) {
    TopRep fa = build_f_a(D, a);
    std::vector<ExpansionRow> out;
    for (const auto& s : D.f->strata()) {
        if (s.kind != StratumKind::EG) continue;
        ExpansionRow r;
        r.stratum = s.index;
        r.observed = spectral_radius(transition_matrix(fa, s.edges));
        r.expected = std::pow(s.lambda, static_cast<double>(a[D.partition.home[s.index]]));
        r.rel_error = std::abs(r.observed - r.expected) / r.expected;
        out.push_back(r);
    }
    return out;
}

}  // namespace flarelab
