#include "flarelab/graph_core.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace flarelab {

MarkedGraph MarkedGraph::build(std::vector<std::string> vertices, const std::vector<EdgeSpec>& edges) {
    MarkedGraph g;
    g.vertex_names = std::move(vertices);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const EdgeSpec& s = edges[k];
        Edge e = static_cast<Edge>(2 * k);
        g.rev.push_back(e + 1);
        g.rev.push_back(e);
        g.init.push_back(s.init);
        g.init.push_back(s.term);
        g.term.push_back(s.term);
        g.term.push_back(s.init);
        g.stratum.push_back(s.stratum);
        g.stratum.push_back(s.stratum);
        g.names.push_back(s.name);
        g.names.push_back(s.name);
    }
    return g;
}

int MarkedGraph::num_strata() const {
    int u = 0;
    for (int s : stratum) u = std::max(u, s);
    return u;
}

Edge MarkedGraph::from_signed(int id) const {
    if (id == 0) throw structural_error("edge id 0 is not allowed");
    Edge e = id > 0 ? 2 * (id - 1) : 2 * (-id - 1) + 1;
    if (e >= num_edges()) throw structural_error("unknown edge id " + std::to_string(id));
    return e;
}

std::string MarkedGraph::label(Edge e) const {
    return is_positive(e) ? names[e] : "~" + names[e];
}

std::vector<Edge> MarkedGraph::out_edges(int v) const {
    std::vector<Edge> out;
    for (Edge e = 0; e < num_edges(); ++e)
        if (init[e] == v) out.push_back(e);
    return out;
}

EdgePath degenerate_path(int vertex) {
    EdgePath p;
    p.start = p.end = vertex;
    return p;
}

EdgePath make_path(const MarkedGraph& g, std::vector<Edge> edges, int vertex_if_empty) {
    EdgePath p;
    if (edges.empty()) return degenerate_path(vertex_if_empty);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (edges[k] < 0 || edges[k] >= g.num_edges()) throw structural_error("edge index out of range");
        if (k > 0 && g.term[edges[k - 1]] != g.init[edges[k]])
            throw structural_error("edges " + g.label(edges[k - 1]) + " and " + g.label(edges[k]) +
                                   " are not composable");
    }
    p.start = g.init[edges.front()];
    p.end = g.term[edges.back()];
    p.edges = std::move(edges);
    return p;
}

EdgePath path_from_ids(const MarkedGraph& g, const std::vector<int>& ids, int vertex_if_empty) {
    std::vector<Edge> es;
    es.reserve(ids.size());
    for (int id : ids) es.push_back(g.from_signed(id));
    return make_path(g, std::move(es), vertex_if_empty);
}

std::vector<int> path_ids(const EdgePath& p) {
    std::vector<int> out;
    out.reserve(p.size());
    for (Edge e : p.edges) out.push_back(MarkedGraph::signed_id(e));
    return out;
}

bool is_tight(const EdgePath& p, const MarkedGraph& g) {
    for (std::size_t k = 1; k < p.size(); ++k)
        if (p.edges[k] == g.rev[p.edges[k - 1]]) return false;
    return true;
}

EdgePath tighten(const MarkedGraph& g, const std::vector<Edge>& seq, int vertex_if_empty) {
    if (seq.empty()) return degenerate_path(vertex_if_empty);
    for (std::size_t k = 1; k < seq.size(); ++k)
        if (g.term[seq[k - 1]] != g.init[seq[k]])
            throw structural_error("cannot tighten a non-composable sequence at position " + std::to_string(k));
    EdgePath p;
    p.start = g.init[seq.front()];
    p.end = g.term[seq.back()];
    p.edges.reserve(seq.size());
    for (Edge e : seq) {
        if (!p.edges.empty() && p.edges.back() == g.rev[e])
            p.edges.pop_back();
        else
            p.edges.push_back(e);
    }
    return p;
}

EdgePath tighten(const MarkedGraph& g, const EdgePath& p) {
    if (p.empty()) return p;
    return tighten(g, p.edges, p.start);
}

EdgePath reverse(const MarkedGraph& g, const EdgePath& p) {
    EdgePath r;
    r.start = p.end;
    r.end = p.start;
    r.edges.reserve(p.size());
    for (auto it = p.edges.rbegin(); it != p.edges.rend(); ++it) r.edges.push_back(g.rev[*it]);
    return r;
}

EdgePath concat(const EdgePath& p, const EdgePath& q) {
    if (p.end != q.start)
        throw structural_error("paths are not composable: " + std::to_string(p.end) + " vs " +
                               std::to_string(q.start));
    EdgePath r = p;
    r.edges.insert(r.edges.end(), q.edges.begin(), q.edges.end());
    r.end = q.end;
    return r;
}

EdgePath join(const MarkedGraph& g, const EdgePath& p, const EdgePath& q) {
    if (p.end != q.start)
        throw structural_error("paths are not composable: " + std::to_string(p.end) + " vs " +
                               std::to_string(q.start));
    EdgePath r = p;
    for (Edge e : q.edges) {
        if (!r.edges.empty() && r.edges.back() == g.rev[e])
            r.edges.pop_back();
        else
            r.edges.push_back(e);
    }
    r.end = q.end;
    return r;
}

EdgePath subpath(const EdgePath& p, std::size_t from, std::size_t to, const MarkedGraph& g) {
    if (from > to || to > p.size()) throw structural_error("subpath range out of bounds");
    EdgePath r;
    r.edges.assign(p.edges.begin() + static_cast<std::ptrdiff_t>(from),
                   p.edges.begin() + static_cast<std::ptrdiff_t>(to));
    if (r.edges.empty()) {
        int v = from == 0 ? p.start : g.term[p.edges[from - 1]];
        return degenerate_path(v);
    }
    r.start = g.init[r.edges.front()];
    r.end = g.term[r.edges.back()];
    return r;
}

std::vector<Edge> canonical_rotation(std::vector<Edge> c) {
    const std::size_t n = c.size();
    if (n < 2) return c;
    std::size_t best = 0;
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t k = 0; k < n; ++k) {
            Edge a = c[(r + k) % n], b = c[(best + k) % n];
            if (a != b) {
                if (a < b) best = r;
                break;
            }
        }
    }
    std::rotate(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(best), c.end());
    return c;
}

Circuit cyclic_tighten(const MarkedGraph& g, const std::vector<Edge>& seq) {
    if (seq.empty()) throw structural_error("empty circuit");
    for (std::size_t k = 0; k < seq.size(); ++k)
        if (g.term[seq[k]] != g.init[seq[(k + 1) % seq.size()]])
            throw structural_error("circuit is not cyclically composable");
    EdgePath p = tighten(g, seq, g.init[seq.front()]);
    std::size_t lo = 0, hi = p.size();
    while (hi - lo >= 2 && p.edges[hi - 1] == g.rev[p.edges[lo]]) {
        ++lo;
        --hi;
    }
    if (hi == lo) throw structural_error("trivial conjugacy class");
    Circuit c;
    c.edges.assign(p.edges.begin() + static_cast<std::ptrdiff_t>(lo),
                   p.edges.begin() + static_cast<std::ptrdiff_t>(hi));
    c.edges = canonical_rotation(std::move(c.edges));
    return c;
}

Circuit reverse(const MarkedGraph& g, const Circuit& c) {
    std::vector<Edge> r;
    for (auto it = c.edges.rbegin(); it != c.edges.rend(); ++it) r.push_back(g.rev[*it]);
    return Circuit{canonical_rotation(std::move(r))};
}

MarkedGraph subgraph(const MarkedGraph& g, int i) {
    const int u = g.num_strata();
    if (i < 0 || i > u) throw structural_error("stratum index " + std::to_string(i) + " out of range 0.." +
                                               std::to_string(u));
    if (i == u) return g;
    std::vector<int> vmap(g.num_vertices(), -1);
    for (Edge e = 0; e < g.num_edges(); ++e)
        if (g.stratum[e] <= i) vmap[g.init[e]] = vmap[g.term[e]] = 0;
    MarkedGraph h;
    for (int v = 0; v < g.num_vertices(); ++v)
        if (vmap[v] == 0) {
            vmap[v] = h.num_vertices();
            h.vertex_names.push_back(g.vertex_names[v]);
        }
    std::vector<Edge> emap(g.num_edges(), -1);
    for (Edge e = 0; e < g.num_edges(); ++e)
        if (g.stratum[e] <= i) emap[e] = static_cast<Edge>(h.rev.size()), h.rev.push_back(-1);
    for (Edge e = 0; e < g.num_edges(); ++e) {
        if (emap[e] < 0) continue;
        h.rev[emap[e]] = emap[g.rev[e]];
        h.init.push_back(vmap[g.init[e]]);
        h.term.push_back(vmap[g.term[e]]);
        h.stratum.push_back(g.stratum[e]);
        h.names.push_back(g.names[e]);
    }
    return h;
}

std::vector<Violation> validate_graph(const MarkedGraph& g) {
    std::vector<Violation> out;
    const int n = g.num_edges();
    const int nv = g.num_vertices();
    auto sizes_ok = static_cast<int>(g.init.size()) == n && static_cast<int>(g.term.size()) == n &&
                    static_cast<int>(g.stratum.size()) == n && static_cast<int>(g.names.size()) == n;
    if (!sizes_ok) {
        out.push_back({"shape", "per-edge arrays have inconsistent lengths"});
        return out;
    }
    bool endpoints_ok = true;
    for (Edge e = 0; e < n; ++e) {
        if (g.init[e] < 0 || g.init[e] >= nv || g.term[e] < 0 || g.term[e] >= nv) {
            out.push_back({"vertex", "edge " + std::to_string(e) + " has an endpoint outside the vertex set"});
            endpoints_ok = false;
        }
    }
    bool involution_ok = true;
    for (Edge e = 0; e < n; ++e) {
        Edge r = g.rev[e];
        if (r < 0 || r >= n) {
            out.push_back({"reverse", "edge " + g.names[e] + " has no reverse partner"});
            involution_ok = false;
            continue;
        }
        if (r == e) {
            out.push_back({"reverse", "edge " + g.names[e] + " is its own reverse"});
            involution_ok = false;
        } else if (g.rev[r] != e) {
            out.push_back({"reverse", "reversal is not an involution at edge " + g.names[e]});
            involution_ok = false;
        }
        if (g.init[r] != g.term[e] || g.term[r] != g.init[e])
            out.push_back({"endpoints", "edge " + g.names[e] + ": init of reverse differs from term"});
        if (g.stratum[r] != g.stratum[e])
            out.push_back({"stratum", "edge " + g.names[e] + ": stratum differs from its reverse"});
    }
    std::set<int> used;
    for (Edge e = 0; e < n; ++e) {
        if (g.stratum[e] < 1)
            out.push_back({"stratum", "edge " + g.names[e] + " has stratum index below 1"});
        else
            used.insert(g.stratum[e]);
    }
    int u = used.empty() ? 0 : *used.rbegin();
    for (int i = 1; i <= u; ++i)
        if (!used.count(i)) out.push_back({"stratum", "stratum index " + std::to_string(i) + " is unused"});
    if (endpoints_ok && involution_ok && nv > 0) {
        std::vector<int> parent(nv);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (Edge e = 0; e < n; ++e) parent[find(g.init[e])] = find(g.term[e]);
        std::set<int> roots;
        for (int v = 0; v < nv; ++v) roots.insert(find(v));
        if (roots.size() > 1)
            out.push_back({"connected", "graph has " + std::to_string(roots.size()) + " components"});
    }
    return out;
}

void for_each_tight_path(const MarkedGraph& g, int max_len, bool include_empty,
                         const std::function<void(const EdgePath&)>& fn) {
    std::vector<std::vector<Edge>> out(g.num_vertices());
    for (Edge e = 0; e < g.num_edges(); ++e) out[g.init[e]].push_back(e);
    EdgePath p;
    std::function<void()> dfs = [&]() {
        fn(p);
        if (static_cast<int>(p.size()) == max_len) return;
        for (Edge e : out[p.end]) {
            if (!p.edges.empty() && e == g.rev[p.edges.back()]) continue;
            p.edges.push_back(e);
            int old = p.end;
            p.end = g.term[e];
            dfs();
            p.end = old;
            p.edges.pop_back();
        }
    };
    for (int v = 0; v < g.num_vertices(); ++v) {
        p = degenerate_path(v);
        if (include_empty) fn(p);
        for (Edge e : out[v]) {
            p.edges = {e};
            p.end = g.term[e];
            if (max_len >= 1) dfs();
        }
    }
}

EdgePath random_tight_path(const MarkedGraph& g, int len, std::mt19937_64& rng, int start) {
    if (start < 0) start = static_cast<int>(std::uniform_int_distribution<int>(0, g.num_vertices() - 1)(rng));
    EdgePath p = degenerate_path(start);
    std::vector<Edge> choices;
    for (int k = 0; k < len; ++k) {
        choices.clear();
        for (Edge e = 0; e < g.num_edges(); ++e)
            if (g.init[e] == p.end && (p.edges.empty() || e != g.rev[p.edges.back()])) choices.push_back(e);
        if (choices.empty()) break;
        Edge e = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
        p.edges.push_back(e);
        p.end = g.term[e];
    }
    return p;
}

}  // namespace flarelab
