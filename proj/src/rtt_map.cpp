#include "flarelab/rtt_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace flarelab {

const char* kind_name(StratumKind k) {
    switch (k) {
        case StratumKind::EG: return "EG";
        case StratumKind::NegFixed: return "NEG-fixed";
        case StratumKind::NegLinear: return "NEG-linear";
        case StratumKind::NegSuperlinear: return "NEG-superlinear";
        case StratumKind::Zero: return "zero";
    }
    return "?";
}

const char* term_kind_name(SplitTerm::Kind k) {
    switch (k) {
        case SplitTerm::Kind::Edge: return "edge";
        case SplitTerm::Kind::Nielsen: return "nielsen";
        case SplitTerm::Kind::Exceptional: return "exceptional";
        case SplitTerm::Kind::Zero: return "zero";
    }
    return "?";
}

TopRep TopRep::build(MarkedGraph g, std::vector<int> vertex_image, const std::vector<EdgePath>& images) {
    TopRep f;
    f.graph = std::move(g);
    f.vertex_image = std::move(vertex_image);
    f.edge_image.resize(f.graph.num_edges());
    for (std::size_t k = 0; k < images.size() && 2 * k + 1 < f.edge_image.size(); ++k) {
        f.edge_image[2 * k] = images[k];
        f.edge_image[2 * k + 1] = reverse(f.graph, images[k]);
    }
    return f;
}

std::vector<Violation> validate_toprep(const TopRep& f) {
    const MarkedGraph& g = f.graph;
    std::vector<Violation> out = validate_graph(g);
    if (!out.empty()) return out;
    const int nv = g.num_vertices();
    if (static_cast<int>(f.vertex_image.size()) != nv) {
        out.push_back({"vertex_image", "vertex image has the wrong size"});
        return out;
    }
    for (int v = 0; v < nv; ++v)
        if (f.vertex_image[v] < 0 || f.vertex_image[v] >= nv)
            out.push_back({"vertex_image", "vertex " + g.vertex_names[v] + " maps outside the vertex set"});
    if (!out.empty()) return out;
    if (static_cast<int>(f.edge_image.size()) != g.num_edges()) {
        out.push_back({"edge_image", "edge image table has the wrong size"});
        return out;
    }
    for (Edge e = 0; e < g.num_edges(); ++e) {
        const EdgePath& im = f.edge_image[e];
        const std::string who = "image of " + g.label(e);
        bool shape_ok = true;
        for (std::size_t k = 0; k < im.size(); ++k) {
            if (im.edges[k] < 0 || im.edges[k] >= g.num_edges()) {
                out.push_back({"edge_image", who + " uses an unknown edge"});
                shape_ok = false;
                break;
            }
            if (k > 0 && g.term[im.edges[k - 1]] != g.init[im.edges[k]]) {
                out.push_back({"edge_image", who + " is not a path"});
                shape_ok = false;
                break;
            }
        }
        if (!shape_ok) continue;
        if (!is_tight(im, g)) out.push_back({"edge_image", who + " is not tight"});
        int s = im.empty() ? im.start : g.init[im.edges.front()];
        int t = im.empty() ? im.end : g.term[im.edges.back()];
        if (s != f.vertex_image[g.init[e]] || t != f.vertex_image[g.term[e]])
            out.push_back({"endpoints", who + " does not run between the images of its endpoints"});
        for (Edge x : im.edges)
            if (g.stratum[x] > g.stratum[e]) {
                out.push_back({"filtration", who + " leaves the filtration element of its stratum"});
                break;
            }
        const EdgePath& imr = f.edge_image[g.rev[e]];
        if (imr.edges != reverse(g, im).edges)
            out.push_back({"reverse", who + " is not the reverse of the image of " + g.label(g.rev[e])});
    }
    if (f.base_vertex >= 0) {
        if (f.base_vertex >= nv)
            out.push_back({"base_vertex", "base vertex outside the vertex set"});
        else if (f.vertex_image[f.base_vertex] != f.base_vertex)
            out.push_back({"base_vertex", "base vertex " + g.vertex_names[f.base_vertex] + " is not fixed"});
    }
    return out;
}

int map_vertex(const TopRep& f, int v, int k) {
    for (int i = 0; i < k; ++i) v = f.vertex_image[v];
    return v;
}

EdgePath apply_map_seq(const TopRep& f, const std::vector<Edge>& seq, int start_vertex) {
    const MarkedGraph& g = f.graph;
    EdgePath r;
    r.start = seq.empty() ? f.vertex_image[start_vertex] : f.vertex_image[g.init[seq.front()]];
    for (Edge e : seq) {
        for (Edge x : f.edge_image[e].edges) {
            if (!r.edges.empty() && r.edges.back() == g.rev[x])
                r.edges.pop_back();
            else
                r.edges.push_back(x);
        }
    }
    r.end = seq.empty() ? r.start : f.vertex_image[g.term[seq.back()]];
    return r;
}

EdgePath apply_map(const TopRep& f, const EdgePath& p, int k) {
    EdgePath q = p;
    for (int i = 0; i < k; ++i) q = apply_map_seq(f, q.edges, q.start);
    return q;
}

int bcc(const TopRep& f, int k) {
    const MarkedGraph& g = f.graph;
    std::vector<EdgePath> im(g.num_edges());
    for (Edge e = 0; e < g.num_edges(); ++e) im[e] = apply_map(f, make_path(g, {e}), k);
    int best = 0;
    for (Edge e = 0; e < g.num_edges(); ++e)
        for (Edge e2 = 0; e2 < g.num_edges(); ++e2) {
            if (g.term[e] != g.init[e2] || e2 == g.rev[e]) continue;
            const auto& a = im[e].edges;
            const auto& b = im[e2].edges;
            int c = 0;
            while (c < static_cast<int>(a.size()) && c < static_cast<int>(b.size()) &&
                   a[a.size() - 1 - c] == g.rev[b[c]])
                ++c;
            best = std::max(best, c);
        }
    return best;
}

EdgePath apply_map_trunc(const TopRep& f, const EdgePath& p, int k, int bcc_k) {
    EdgePath q = apply_map(f, p, k);
    const std::size_t b = static_cast<std::size_t>(bcc_k);
    if (q.size() <= 2 * b) return subpath(q, q.size() / 2, q.size() / 2, f.graph);
    return subpath(q, b, q.size() - b, f.graph);
}

EdgePath apply_map_trunc(const TopRep& f, const EdgePath& p, int k) {
    return apply_map_trunc(f, p, k, bcc(f, k));
}

Matrix transition_matrix(const TopRep& f, const std::vector<Edge>& edges) {
    const MarkedGraph& g = f.graph;
    Matrix m(edges.size(), std::vector<long long>(edges.size(), 0));
    std::map<Edge, std::size_t> row;
    for (std::size_t i = 0; i < edges.size(); ++i) row[g.positive(edges[i])] = i;
    for (std::size_t c = 0; c < edges.size(); ++c)
        for (Edge x : f.edge_image[edges[c]].edges) {
            auto it = row.find(g.positive(x));
            if (it != row.end()) ++m[it->second][c];
        }
    return m;
}

namespace {

// Strongly connected components of the digraph i -> j when m[i][j] > 0.
std::vector<int> scc_ids(const Matrix& m, int& count) {
    const int n = static_cast<int>(m.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on(n, false);
    int next = 0;
    count = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = next++;
        stack.push_back(v);
        on[v] = true;
        for (int w = 0; w < n; ++w) {
            if (m[v][w] <= 0) continue;
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = false;
                comp[w] = count;
            } while (w != v);
            ++count;
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return comp;
}

long double newton_largest_root(const std::vector<long long>& coeffs, long double start) {
    auto eval = [&](long double x, long double& d) {
        long double p = 0;
        d = 0;
        for (long long c : coeffs) {
            d = d * x + p;
            p = p * x + static_cast<long double>(c);
        }
        return p;
    };
    long double x = start;
    for (int it = 0; it < 500; ++it) {
        long double d;
        long double p = eval(x, d);
        if (d == 0) break;
        long double nx = x - p / d;
        if (std::fabs(nx - x) <= 1e-18L * std::max<long double>(1, std::fabs(x))) {
            x = nx;
            break;
        }
        x = nx;
    }
    return x;
}

}  // namespace

bool is_irreducible(const Matrix& m) {
    if (m.empty()) return false;
    if (m.size() == 1) return m[0][0] > 0;
    int count = 0;
    scc_ids(m, count);
    return count == 1;
}

std::vector<long long> characteristic_polynomial(const Matrix& m) {
    // Faddeev-LeVerrier; every division is exact for integer matrices.
    const std::size_t n = m.size();
    std::vector<long long> c(n + 1, 0);
    c[0] = 1;
    Matrix mk(n, std::vector<long long>(n, 0));
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix next(n, std::vector<long long>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                long long s = 0;
                for (std::size_t t = 0; t < n; ++t) s += m[i][t] * mk[t][j];
                next[i][j] = s + (i == j ? c[k - 1] : 0);
            }
        mk = next;
        long long tr = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < n; ++t) tr += m[i][t] * mk[t][i];
        c[k] = -tr / static_cast<long long>(k);
    }
    return c;
}

PfResult pf_spectrum(const Matrix& m) {
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw std::invalid_argument("matrix is not square");
    if (!is_irreducible(m)) throw taxonomy_error("matrix is reducible");
    std::vector<long double> v(n, 1.0L), w(n);
    long double mu = 0, prev = -1;
    for (int it = 0; it < 200000; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            long double s = v[j];
            for (std::size_t i = 0; i < n; ++i) s += v[i] * static_cast<long double>(m[i][j]);
            w[j] = s;
        }
        long double vw = 0, vv = 0, mx = 0;
        for (std::size_t j = 0; j < n; ++j) {
            vw += v[j] * w[j];
            vv += v[j] * v[j];
            mx = std::max(mx, w[j]);
        }
        mu = vw / vv;
        for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / mx;
        if (std::fabs(mu - prev) <= 1e-12L * mu && it > 8) break;
        prev = mu;
    }
    // A few more steps after the stopping rule fires tighten the vector.
    for (int it = 0; it < 64; ++it) {
        long double mx = 0;
        for (std::size_t j = 0; j < n; ++j) {
            long double s = v[j];
            for (std::size_t i = 0; i < n; ++i) s += v[i] * static_cast<long double>(m[i][j]);
            w[j] = s;
            mx = std::max(mx, s);
        }
        for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / mx;
    }
    long double mn = *std::min_element(v.begin(), v.end());
    for (auto& x : v) x /= mn;
    long double num = 0, den = 0;
    for (std::size_t j = 0; j < n; ++j) {
        long double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i] * static_cast<long double>(m[i][j]);
        num += s * v[j];
        den += v[j] * v[j];
    }
    long double lambda = num / den;
    long double res = 0, vmax = 0;
    for (std::size_t j = 0; j < n; ++j) {
        long double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i] * static_cast<long double>(m[i][j]);
        res = std::max(res, std::fabs(s - lambda * v[j]));
        vmax = std::max(vmax, v[j]);
    }
    if (res > 1e-10L * vmax) throw taxonomy_error("power iteration did not reach the residual bound");
    if (n <= 4) {
        auto cp = characteristic_polynomial(m);
        long double bound = 0;
        for (std::size_t j = 0; j < n; ++j) {
            long double col = 0;
            for (std::size_t i = 0; i < n; ++i) col += static_cast<long double>(m[i][j]);
            bound = std::max(bound, col);
        }
        long double root = newton_largest_root(cp, bound + 1);
        if (std::fabs(root - lambda) > 1e-9L * std::max<long double>(1, lambda))
            throw taxonomy_error("power iteration disagrees with the characteristic polynomial");
        lambda = root;
    }
    PfResult r;
    r.lambda = static_cast<double>(lambda);
    for (auto x : v) r.vector.push_back(static_cast<double>(x));
    r.residual = static_cast<double>(res);
    return r;
}

double spectral_radius(const Matrix& m) {
    if (m.empty()) return 0;
    int count = 0;
    auto comp = scc_ids(m, count);
    double best = 0;
    for (int c = 0; c < count; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (comp[i] == c) idx.push_back(i);
        Matrix b(idx.size(), std::vector<long long>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) b[i][j] = m[idx[i]][idx[j]];
        if (!is_irreducible(b)) continue;
        best = std::max(best, b.size() == 1 ? static_cast<double>(b[0][0]) : pf_spectrum(b).lambda);
    }
    return best;
}

namespace {

bool lex_less(const std::vector<Edge>& a, const std::vector<Edge>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void classify_single_edge(const TopRep& f, StratumInfo& s, std::vector<std::string>& errors) {
    const MarkedGraph& g = f.graph;
    const Edge e = s.edges.front();
    const EdgePath& im = f.edge_image[e];
    if (im.edges.front() != e) {
        errors.push_back("stratum " + std::to_string(s.index) + ": image of " + g.label(e) +
                         " does not start with the edge itself");
        return;
    }
    EdgePath u = subpath(im, 1, im.size(), g);
    if (u.empty()) {
        s.kind = StratumKind::NegFixed;
        return;
    }
    s.kind = StratumKind::NegSuperlinear;
    if (u.start != u.end) return;
    std::size_t lo = 0, hi = u.size();
    while (hi - lo >= 2 && u.edges[hi - 1] == g.rev[u.edges[lo]]) ++lo, --hi;
    std::vector<Edge> y(u.edges.begin() + static_cast<std::ptrdiff_t>(lo),
                        u.edges.begin() + static_cast<std::ptrdiff_t>(hi));
    std::size_t period = y.size();
    for (std::size_t t = 1; t < y.size(); ++t) {
        if (y.size() % t) continue;
        bool ok = true;
        for (std::size_t j = t; j < y.size() && ok; ++j) ok = y[j] == y[j - t];
        if (ok) {
            period = t;
            break;
        }
    }
    int d = static_cast<int>(y.size() / period);
    std::vector<Edge> seq(u.edges.begin(), u.edges.begin() + static_cast<std::ptrdiff_t>(lo));
    seq.insert(seq.end(), y.begin(), y.begin() + static_cast<std::ptrdiff_t>(period));
    for (std::size_t k = lo; k-- > 0;) seq.push_back(g.rev[u.edges[k]]);
    EdgePath w = tighten(g, seq, u.start);
    if (apply_map(f, w, 1) != w) return;
    std::vector<Edge> pow;
    for (int k = 0; k < d; ++k) pow.insert(pow.end(), w.edges.begin(), w.edges.end());
    if (tighten(g, pow, w.start).edges != u.edges) return;
    EdgePath wr = reverse(g, w);
    if (lex_less(wr.edges, w.edges)) {
        w = wr;
        d = -d;
    }
    s.kind = StratumKind::NegLinear;
    s.twist_path = w;
    s.twist_circuit = cyclic_tighten(g, w.edges);
    s.twist_coefficient = d;
}

// Each component of the zero stratum must be a tree meeting the next
// nonzero stratum above, and that stratum must be EG.
void check_envelopment(const TopRep& f, const std::vector<StratumInfo>& strata, const StratumInfo& z,
                       std::vector<std::string>& errors) {
    const MarkedGraph& g = f.graph;
    const StratumInfo* above = nullptr;
    for (const auto& s : strata)
        if (s.index > z.index && s.kind != StratumKind::Zero) {
            above = &s;
            break;
        }
    const std::string who = "zero stratum " + std::to_string(z.index);
    if (!above || above->kind != StratumKind::EG) {
        errors.push_back(who + " is not enveloped by an EG stratum");
        return;
    }
    std::set<int> eg_vertices;
    for (Edge e : above->edges) eg_vertices.insert(g.init[e]), eg_vertices.insert(g.term[e]);
    std::map<int, int> parent;
    std::function<int(int)> find = [&](int x) {
        if (!parent.count(x)) parent[x] = x;
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    std::map<int, int> edges_in;
    for (Edge e : z.edges) {
        int a = find(g.init[e]), b = find(g.term[e]);
        if (a == b) {
            errors.push_back(who + " contains a cycle through " + g.label(e));
            return;
        }
        parent[a] = b;
    }
    std::map<int, bool> touches;
    for (auto& [v, p] : parent) {
        int r = find(v);
        touches[r] = touches[r] || eg_vertices.count(v) > 0;
    }
    for (auto& [r, t] : touches)
        if (!t) errors.push_back(who + " has a component disjoint from stratum " + std::to_string(above->index));
}

}  // namespace

std::vector<StratumInfo> classify_strata(const TopRep& f) {
    const MarkedGraph& g = f.graph;
    const int u = g.num_strata();
    std::vector<StratumInfo> out(u);
    std::vector<std::string> errors;
    for (int i = 1; i <= u; ++i) {
        StratumInfo& s = out[i - 1];
        s.index = i;
        for (Edge e = 0; e < g.num_edges(); e += 2)
            if (g.stratum[e] == i) s.edges.push_back(e);
        s.transition = transition_matrix(f, s.edges);
        bool zero = true;
        for (const auto& row : s.transition)
            for (long long x : row) zero = zero && x == 0;
        if (zero) {
            s.kind = StratumKind::Zero;
            continue;
        }
        for (Edge e : s.edges)
            if (f.edge_image[e].empty())
                errors.push_back("stratum " + std::to_string(i) + ": edge " + g.label(e) + " has a degenerate image");
        if (s.edges.size() == 1 && s.transition[0][0] == 1) {
            classify_single_edge(f, s, errors);
            continue;
        }
        if (!is_irreducible(s.transition)) {
            errors.push_back("stratum " + std::to_string(i) + " has a reducible transition matrix");
            continue;
        }
        PfResult pf = pf_spectrum(s.transition);
        if (pf.lambda <= 1 + 1e-12) {
            errors.push_back("stratum " + std::to_string(i) + " is irreducible with spectral radius 1");
            continue;
        }
        s.kind = StratumKind::EG;
        s.lambda = pf.lambda;
        s.eigenvector = pf.vector;
    }
    for (const auto& s : out)
        if (s.kind == StratumKind::Zero) check_envelopment(f, out, s, errors);
    if (!errors.empty()) {
        std::string msg = "taxonomy error:";
        for (const auto& e : errors) msg += " " + e + ";";
        throw taxonomy_error(msg);
    }
    return out;
}

TurnData turn_analysis(const TopRep& f, int top_stratum) {
    const MarkedGraph& g = f.graph;
    const int n = g.num_edges();
    TurnData t;
    t.df.assign(n, -1);
    for (Edge e = 0; e < n; ++e)
        if (!f.edge_image[e].empty()) t.df[e] = f.edge_image[e].edges.front();
    const int steps = 2 * n;
    std::vector<std::vector<Edge>> it(steps + 1, std::vector<Edge>(n));
    for (Edge e = 0; e < n; ++e) it[0][e] = e;
    for (int k = 0; k < steps; ++k)
        for (Edge e = 0; e < n; ++e) it[k + 1][e] = it[k][e] < 0 ? -1 : t.df[it[k][e]];
    t.gate.assign(n, -1);
    int next = 0;
    for (Edge e = 0; e < n; ++e) {
        if (t.gate[e] >= 0) continue;
        t.gate[e] = next;
        for (Edge e2 = e + 1; e2 < n; ++e2) {
            if (t.gate[e2] >= 0 || g.init[e2] != g.init[e]) continue;
            for (int k = 1; k <= steps; ++k)
                if (it[k][e] >= 0 && it[k][e] == it[k][e2]) {
                    t.gate[e2] = next;
                    break;
                }
        }
        ++next;
    }
    for (Edge a = 0; a < n; ++a)
        for (Edge b = a + 1; b < n; ++b)
            if (g.stratum[a] == top_stratum && g.stratum[b] == top_stratum && t.gate[a] == t.gate[b])
                t.illegal.emplace_back(a, b);
    return t;
}

TrackMap::TrackMap(TopRep f) : rep_(std::move(f)) {
    auto violations = validate_toprep(rep_);
    if (!violations.empty()) {
        std::string msg = "invalid map:";
        for (const auto& v : violations) msg += " [" + v.code + "] " + v.message + ";";
        throw structural_error(msg);
    }
    strata_ = classify_strata(rep_);
    top_ = rep_.graph.num_strata();
    const StratumInfo& top = strata_.back();
    if (top.kind == StratumKind::Zero) throw taxonomy_error("top stratum is a zero stratum");
    lpf_.assign(rep_.graph.num_edges(), 0.0);
    if (top.kind == StratumKind::EG) {
        lambda_ = top.lambda;
        for (std::size_t i = 0; i < top.edges.size(); ++i) {
            lpf_[top.edges[i]] = top.eigenvector[i];
            lpf_[rep_.graph.rev[top.edges[i]]] = top.eigenvector[i];
        }
    } else {
        lambda_ = 1.0;
        for (Edge e : top.edges) lpf_[e] = lpf_[rep_.graph.rev[e]] = 1.0;
    }
    turns_ = turn_analysis(rep_, top_);
    bcc1_ = bcc(rep_, 1);
    if (rep_.nielsen) {
        NielsenVerdict v = verify_nielsen(*this, rep_.nielsen->path, rep_.nielsen->split);
        if (!v.certificate) throw taxonomy_error("declared Nielsen path rejected: " + v.refusal);
        rho_ = v.certificate;
    }
}

bool TrackMap::is_illegal_turn(Edge a, Edge b) const {
    return a != b && in_top(a) && in_top(b) && turns_.gate[a] == turns_.gate[b];
}

double eigenlength(const TrackMap& f, const EdgePath& p) {
    double s = 0;
    for (Edge e : p.edges) s += f.lpf(e);
    return s;
}

int illegal_turn_count(const TrackMap& f, const EdgePath& p) {
    int c = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
        if (f.is_illegal_turn(f.graph().rev[p.edges[k - 1]], p.edges[k])) ++c;
    return c;
}

bool is_u_legal(const TrackMap& f, const EdgePath& p) { return illegal_turn_count(f, p) == 0; }

NielsenVerdict verify_nielsen(const TrackMap& f, const EdgePath& cand, std::optional<std::size_t> declared_split) {
    const MarkedGraph& g = f.graph();
    NielsenVerdict out;
    if (cand.empty()) {
        out.refusal = "candidate is degenerate";
        return out;
    }
    if (!is_tight(cand, g)) {
        out.refusal = "candidate is not tight";
        return out;
    }
    if (apply_map(f.rep(), cand, 1) != cand) {
        out.refusal = "f_#(rho) != rho";
        return out;
    }
    std::vector<std::size_t> at;
    for (std::size_t k = 1; k < cand.size(); ++k)
        if (f.is_illegal_turn(g.rev[cand.edges[k - 1]], cand.edges[k])) at.push_back(k);
    if (at.size() != 1) {
        out.refusal = "not indivisible: illegal-turn count != 1 (found " + std::to_string(at.size()) + ")";
        return out;
    }
    const std::size_t split = at.front();
    if (declared_split && *declared_split != split) {
        out.refusal = "declared split " + std::to_string(*declared_split) + " differs from the illegal turn at " +
                      std::to_string(split);
        return out;
    }
    NielsenCertificate c;
    c.rho = cand;
    c.split = split;
    c.alpha = subpath(cand, 0, split, g);
    c.beta = subpath(cand, split, cand.size(), g);
    if (!is_u_legal(f, c.alpha) || !is_u_legal(f, c.beta)) {
        out.refusal = "a half is not u-legal";
        return out;
    }
    c.l_alpha = eigenlength(f, c.alpha);
    c.l_beta = eigenlength(f, c.beta);
    if (std::fabs(c.l_alpha - c.l_beta) > 1e-8 * std::max(c.l_alpha, c.l_beta)) {
        out.refusal = "eigenlengths of the halves differ";
        return out;
    }
    c.closed = cand.start == cand.end;
    auto lower_vertex = [&](int v) {
        for (Edge e = 0; e < g.num_edges(); ++e)
            if (g.init[e] == v && g.stratum[e] < f.top()) return true;
        return false;
    };
    c.start_in_lower = lower_vertex(cand.start);
    c.end_in_lower = lower_vertex(cand.end);
    out.certificate = c;
    return out;
}

std::vector<EdgePath> search_nielsen(const TrackMap& f, int max_len) {
    std::vector<EdgePath> found;
    for_each_tight_path(f.graph(), max_len, false, [&](const EdgePath& p) {
        if (apply_map(f.rep(), p, 1) != p) return;
        if (verify_nielsen(f, p).certificate) found.push_back(p);
    });
    return found;
}

FixedCircuitResult is_fixed_circuit(const TrackMap& f, const Circuit& c) {
    const MarkedGraph& g = f.graph();
    FixedCircuitResult out;
    std::vector<Edge> seq;
    for (Edge e : c.edges) {
        const auto& im = f.rep().edge_image[e].edges;
        seq.insert(seq.end(), im.begin(), im.end());
    }
    if (seq.empty()) {
        out.note = "image is degenerate";
        return out;
    }
    try {
        out.fixed = cyclic_tighten(g, seq).edges == canonical_rotation(c.edges);
    } catch (const structural_error&) {
        out.note = "image is trivial";
        return out;
    }
    if (!out.fixed) return out;
    std::vector<Edge> rho, rho_bar;
    if (f.rho()) {
        rho = f.rho()->rho.edges;
        rho_bar = reverse(g, f.rho()->rho).edges;
    }
    const std::size_t n = c.edges.size();
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<Edge> s(n);
        for (std::size_t k = 0; k < n; ++k) s[k] = c.edges[(r + k) % n];
        std::vector<Piece> pieces;
        std::size_t i = 0;
        bool ok = true;
        while (i < n && ok) {
            const auto& im = f.rep().edge_image[s[i]].edges;
            if (im.size() == 1 && im.front() == s[i]) {
                pieces.push_back({false, s[i], 1});
                ++i;
                continue;
            }
            auto match = [&](const std::vector<Edge>& w) {
                return !w.empty() && i + w.size() <= n && std::equal(w.begin(), w.end(), s.begin() + static_cast<std::ptrdiff_t>(i));
            };
            if (match(rho)) {
                pieces.push_back({true, -1, 1});
                i += rho.size();
            } else if (match(rho_bar)) {
                pieces.push_back({true, -1, -1});
                i += rho_bar.size();
            } else {
                ok = false;
            }
        }
        if (ok) {
            out.decomposition = pieces;
            out.rotation = r;
            return out;
        }
    }
    out.note = "no decomposition into fixed edges and copies of the declared Nielsen path";
    return out;
}

}  // namespace flarelab
