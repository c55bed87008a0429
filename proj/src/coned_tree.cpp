#include "flarelab/coned_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <random>

namespace flarelab {

const char* element_kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::Elliptic: return "Elliptic";
        case ElementKind::LoxNielsenAxis: return "LoxNielsenAxis";
        case ElementKind::Loxodromic: return "Loxodromic";
    }
    return "?";
}

std::uint64_t path_hash(const std::vector<Edge>& v) {
    std::uint64_t h = 1469598103934665603ULL;
    for (Edge e : v) {
        auto x = static_cast<std::uint32_t>(e);
        for (int k = 0; k < 4; ++k) {
            h ^= (x >> (8 * k)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    h ^= v.size();
    h *= 1099511628211ULL;
    return h;
}

int PathIndex::find(const std::vector<Edge>& key, const std::vector<TreePoint>& store) const {
    auto it = primary_.find(path_hash(key));
    if (it != primary_.end() && store[it->second].base_path.edges == key) return it->second;
    if (overflow_.empty()) return -1;
    auto jt = overflow_.find(key);
    return jt == overflow_.end() ? -1 : jt->second;
}

void PathIndex::insert(const std::vector<Edge>& key, int id, const std::vector<TreePoint>& store) {
    auto [it, fresh] = primary_.emplace(path_hash(key), id);
    if (!fresh && store[it->second].base_path.edges != key) overflow_.emplace(key, id);
}

bool DistanceTable::reached(int i) const { return value[i] != std::numeric_limits<long double>::infinity(); }

ExactLength DistanceTable::at(int i) const {
    ExactLength l;
    l.half_units.assign(half_units.begin() + static_cast<std::ptrdiff_t>(i) * slots,
                        half_units.begin() + static_cast<std::ptrdiff_t>(i + 1) * slots);
    l.value = value[i];
    return l;
}

TreeSpace::TreeSpace(const TrackMap& f, int lower_cap) : f_(f), lower_cap_(lower_cap) {
    const TopRep& r = f.rep();
    const MarkedGraph& g = f.graph();
    base_ = r.base_vertex;
    if (base_ < 0 || base_ >= g.num_vertices()) throw configuration_error("no base vertex declared");
    if (r.vertex_image[base_] != base_)
        throw configuration_error("base vertex " + g.vertex_names[base_] + " is not fixed by f");
    if (lower_cap < 0) throw configuration_error("lower_cap must be >= 0");

    slot_.assign(g.num_edges(), -1);
    for (Edge e = 0; e < g.num_edges(); e += 2) {
        if (!f.in_top(e)) continue;
        slot_[e] = slot_[g.rev[e]] = static_cast<int>(slot_edges_.size());
        slot_edges_.push_back(e);
        slot_len_.push_back(f.lpf(e));
    }
    rho_counts_.assign(slot_edges_.size(), 0);
    if (f.rho()) {
        const EdgePath& rho = f.rho()->rho;
        for (Edge e : rho.edges) {
            if (slot_[e] >= 0) ++rho_counts_[slot_[e]];
            h_ += f.lpf(e) / 2;
        }
        if (f.rho()->closed && !is_tight(concat(rho, rho), g))
            throw configuration_error("closed Nielsen path rho with rho.rho not tight has no Nielsen line");
    }

    lower_paths_.assign(g.num_vertices(), {});
    lower_capped_.assign(g.num_vertices(), false);
    for (int v = 0; v < g.num_vertices(); ++v) {
        auto& out = lower_paths_[v];
        out.push_back(degenerate_path(v));
        std::vector<Edge> stack;
        // Depth-first over lower edges with no backtracking.
        std::function<void(int)> dfs = [&](int at) {
            for (Edge e : g.out_edges(at)) {
                if (f.in_top(e)) continue;
                if (!stack.empty() && e == g.rev[stack.back()]) continue;
                if (static_cast<int>(stack.size()) == lower_cap_) {
                    lower_capped_[v] = true;
                    return;
                }
                stack.push_back(e);
                out.push_back(EdgePath{stack, v, g.term[e]});
                dfs(g.term[e]);
                stack.pop_back();
            }
        };
        dfs(v);
    }
}

TreePoint TreeSpace::root() const { return TreePoint{degenerate_path(base_)}; }

TreePoint TreeSpace::tree_point(const EdgePath& p) const {
    if (p.start != base_) throw structural_error("tree_point: path does not start at the base vertex");
    EdgePath t = tighten(f_.graph(), p);
    while (!t.edges.empty() && !f_.in_top(t.edges.back())) {
        t.edges.pop_back();
        t.end = t.edges.empty() ? t.start : f_.graph().term[t.edges.back()];
    }
    return TreePoint{std::move(t)};
}

bool TreeSpace::same_point(const EdgePath& p, const EdgePath& q) const {
    EdgePath d = join(f_.graph(), reverse(f_.graph(), p), q);
    return std::none_of(d.edges.begin(), d.edges.end(), [&](Edge e) { return f_.in_top(e); });
}

std::vector<std::pair<TreePoint, Edge>> TreeSpace::steps(const TreePoint& x, bool* truncated) const {
    const MarkedGraph& g = f_.graph();
    const EdgePath& p = x.base_path;
    std::vector<std::pair<TreePoint, Edge>> out;
    if (truncated && lower_capped_[p.end]) *truncated = true;
    for (const EdgePath& q : lower_paths_[p.end]) {
        for (Edge e : g.out_edges(q.end)) {
            if (!f_.in_top(e)) continue;
            if (q.empty() && !p.empty() && e == g.rev[p.edges.back()]) {
                EdgePath up = p;
                up.edges.pop_back();
                up.end = up.edges.empty() ? up.start : g.term[up.edges.back()];
                out.emplace_back(tree_point(up), e);
                continue;
            }
            EdgePath n = p;
            n.edges.insert(n.edges.end(), q.edges.begin(), q.edges.end());
            n.edges.push_back(e);
            n.end = g.term[e];
            out.emplace_back(TreePoint{std::move(n)}, e);
        }
    }
    return out;
}

std::vector<TreePoint> TreeSpace::neighbors(const TreePoint& x, bool* truncated) const {
    std::vector<TreePoint> out;
    for (auto& s : steps(x, truncated)) out.push_back(std::move(s.first));
    return out;
}

Geodesic TreeSpace::tree_geodesic(const TreePoint& V, const TreePoint& W) const {
    const MarkedGraph& g = f_.graph();
    Geodesic geo;
    geo.path = join(g, reverse(g, V.base_path), W.base_path);
    geo.decomposition = mu_nu(f_, geo.path);
    BigLengths L = big_L(f_, geo.path);
    geo.D_u = L.Lu;
    geo.D_pf = L.Lpf;
    geo.vertices.push_back(V);
    EdgePath cur = V.base_path;
    for (Edge e : geo.path.edges) {
        if (!cur.empty() && e == g.rev[cur.edges.back()])
            cur.edges.pop_back();
        else
            cur.edges.push_back(e);
        cur.end = cur.edges.empty() ? cur.start : g.term[cur.edges.back()];
        if (f_.in_top(e)) geo.vertices.push_back(tree_point(cur));
    }
    return geo;
}

int TreeSpace::tree_edge_distance(const TreePoint& V, const TreePoint& W) const {
    EdgePath d = join(f_.graph(), reverse(f_.graph(), V.base_path), W.base_path);
    return static_cast<int>(std::count_if(d.edges.begin(), d.edges.end(), [&](Edge e) { return f_.in_top(e); }));
}

TreePoint TreeSpace::act(const EdgePath& loop, const TreePoint& x) const {
    if (loop.start != base_ || loop.end != base_) throw structural_error("act: word is not a loop at the base vertex");
    return tree_point(join(f_.graph(), loop, x.base_path));
}

TreePoint TreeSpace::lift_apply(const TreePoint& x) const { return tree_point(apply_map(f_.rep(), x.base_path, 1)); }

EdgePath TreeSpace::phi(const EdgePath& loop) const {
    if (loop.start != base_ || loop.end != base_) throw structural_error("phi: word is not a loop at the base vertex");
    return apply_map(f_.rep(), loop, 1);
}

ExactLength TreeSpace::zero_length() const {
    ExactLength l;
    l.half_units.assign(slot_edges_.size(), 0);
    return l;
}

long double TreeSpace::evaluate(const std::vector<long long>& half_units) const {
    long double v = 0;
    for (std::size_t s = 0; s < half_units.size(); ++s) v += static_cast<long double>(half_units[s]) * slot_len_[s];
    return v / 2;
}

ConedBall TreeSpace::coned_neighborhood(const std::vector<TreePoint>& seeds, int radius,
                                         std::size_t max_nodes) const {
    if (radius < 0) throw std::invalid_argument("radius must be >= 0");
    if (seeds.empty()) throw std::invalid_argument("no seed vertices");
    ConedBall b;
    b.center = seeds.front();
    b.radius = radius;
    auto add = [&](TreePoint p, int d) {
        if (b.points.size() >= max_nodes)
            throw truncation_error("coned ball exceeds " + std::to_string(max_nodes) + " vertices");
        const int id = static_cast<int>(b.points.size());
        b.index.insert(p.base_path.edges, id, b.points);
        b.points.push_back(std::move(p));
        b.depth.push_back(d);
        b.adj.emplace_back();
        return id;
    };
    std::deque<int> queue;
    for (const TreePoint& s : seeds) {
        if (s.base_path.start != base_) throw structural_error("seed is not based at the base vertex");
        if (b.find(s) < 0) queue.push_back(add(s, 0));
    }
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        if (b.depth[i] >= radius) continue;
        bool trunc = false;
        auto st = steps(b.points[i], &trunc);
        b.truncated = b.truncated || trunc;
        for (auto& [p, e] : st) {
            int j = b.find(p);
            if (j < 0) {
                j = add(std::move(p), b.depth[i] + 1);
                queue.push_back(j);
            }
            b.adj[i].push_back({j, slot_[e]});
            if (b.depth[j] >= radius) b.adj[j].push_back({i, slot_[e]});
        }
    }
    b.num_tree = static_cast<int>(b.points.size());
    add_cones(b);
    return b;
}

ConedBall TreeSpace::coned_ball(const TreePoint& center, int radius, std::size_t max_nodes) const {
    return coned_neighborhood({center}, radius, max_nodes);
}

void TreeSpace::add_cones(ConedBall& b) const {
    if (!f_.rho()) return;
    const MarkedGraph& g = f_.graph();
    const EdgePath& rho = f_.rho()->rho;
    const EdgePath rho_bar = reverse(g, rho);

    // Lift points of the universal cover are (tree node, lower path) pairs.
    std::vector<std::map<std::vector<Edge>, int>> lower_index(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v)
        for (std::size_t k = 0; k < lower_paths_[v].size(); ++k) lower_index[v][lower_paths_[v][k].edges] = static_cast<int>(k);
    std::vector<int> offset(b.num_tree + 1, 0);
    for (int i = 0; i < b.num_tree; ++i)
        offset[i + 1] = offset[i] + static_cast<int>(lower_paths_[b.points[i].base_path.end].size());

    std::vector<int> uf(offset.back());
    for (std::size_t k = 0; k < uf.size(); ++k) uf[k] = static_cast<int>(k);
    auto root = [&](int a) {
        while (uf[a] != a) a = uf[a] = uf[uf[a]];
        return a;
    };
    auto locate = [&](const EdgePath& z) {
        TreePoint t = tree_point(z);
        const int node = b.find(t);
        if (node < 0) return -1;
        std::vector<Edge> tail(z.edges.begin() + static_cast<std::ptrdiff_t>(t.base_path.size()), z.edges.end());
        const auto& idx = lower_index[z.end];
        auto it = idx.find(tail);
        return it == idx.end() ? -1 : offset[node] + it->second;
    };

    std::vector<char> lattice(uf.size(), 0);
    for (int i = 0; i < b.num_tree; ++i) {
        const EdgePath& p = b.points[i].base_path;
        const auto& qs = lower_paths_[p.end];
        for (std::size_t k = 0; k < qs.size(); ++k) {
            const int id = offset[i] + static_cast<int>(k);
            const int end = qs[k].end;
            if (end != rho.start && end != rho.end) continue;
            lattice[id] = 1;
            EdgePath y = concat(p, qs[k]);
            for (const EdgePath* step : {&rho, &rho_bar}) {
                if (end != step->start) continue;
                const int other = locate(join(g, y, *step));
                if (other >= 0) uf[root(id)] = root(other);
            }
        }
    }

    std::unordered_map<int, int> cone_of;
    for (int i = 0; i < b.num_tree; ++i) {
        for (int id = offset[i]; id < offset[i + 1]; ++id) {
            if (!lattice[id]) continue;
            auto [it, fresh] = cone_of.emplace(root(id), b.num_cones);
            if (fresh) {
                ++b.num_cones;
                b.cone_members.emplace_back();
                b.adj.emplace_back();
            }
            auto& members = b.cone_members[it->second];
            if (std::find(members.begin(), members.end(), i) != members.end()) continue;
            members.push_back(i);
            const int c = b.num_tree + it->second;
            b.adj[c].push_back({i, -1});
            b.adj[i].push_back({c, -1});
        }
    }
}

DistanceTable ball_distances(const TreeSpace& T, const ConedBall& b, int source, const std::vector<int>& targets) {
    const int n = b.size();
    const int S = T.slots();
    DistanceTable dt;
    dt.slots = S;
    dt.value.assign(n, std::numeric_limits<long double>::infinity());
    dt.half_units.assign(static_cast<std::size_t>(n) * S, 0);
    dt.parent.assign(n, -1);
    if (source < 0 || source >= n) throw std::out_of_range("source node outside the ball");

    std::vector<long double> step_len(S + 1);
    for (int s = 0; s < S; ++s) step_len[s] = T.slot_length(s);
    step_len[S] = T.h();
    std::vector<int> rho_units(S, 0);
    if (T.map().rho())
        for (Edge e : T.map().rho()->rho.edges)
            if (T.slot_of(e) >= 0) ++rho_units[T.slot_of(e)];

    std::vector<char> wanted(n, 0), done(n, 0);
    int remaining = 0;
    for (int t : targets)
        if (!wanted[t]) wanted[t] = 1, ++remaining;

    using Item = std::pair<long double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dt.value[source] = 0;
    pq.push({0, source});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (wanted[u] && --remaining == 0) break;
        for (const auto& a : b.adj[u]) {
            const long double nd = d + step_len[a.slot < 0 ? S : a.slot];
            if (nd < dt.value[a.to]) {
                dt.value[a.to] = nd;
                dt.parent[a.to] = u;
                int* dst = &dt.half_units[static_cast<std::size_t>(a.to) * S];
                const int* src = &dt.half_units[static_cast<std::size_t>(u) * S];
                std::copy(src, src + S, dst);
                if (a.slot < 0)
                    for (int s = 0; s < S; ++s) dst[s] += rho_units[s];
                else
                    dst[a.slot] += 2;
                pq.push({nd, a.to});
            }
        }
    }
    return dt;
}

ConeDistance TreeSpace::cone_distance(const TreePoint& V, const TreePoint& W) const {
    Geodesic geo = tree_geodesic(V, W);
    // Lines worth entering pass within l_u(rho) T-edges of the geodesic.
    const int radius = f_.rho() ? std::max<int>(1, static_cast<int>(little_lengths(f_, f_.rho()->rho).lu)) : 1;
    ConedBall tube = coned_neighborhood(geo.vertices, radius);
    const int s = tube.find(V), t = tube.find(W);
    DistanceTable dt = ball_distances(*this, tube, s, {t});
    if (!dt.reached(t)) throw std::logic_error("cone_distance: target not reached inside the tube");
    ConeDistance out;
    ExactLength l = dt.at(t);
    out.d_star.half_units.assign(l.half_units.begin(), l.half_units.end());
    out.d_star.value = evaluate(out.d_star.half_units);
    out.value = static_cast<double>(out.d_star.value);
    out.tube_nodes = tube.size();
    out.truncated = tube.truncated;
    out.geodesic_bypass_bound = geo.D_pf + static_cast<double>(geo.decomposition.A()) * 2 * h_;
    std::vector<int> chain;
    for (int v = t; v >= 0; v = dt.parent[v]) chain.push_back(v);
    std::reverse(chain.begin(), chain.end());
    bool via = false;
    for (int v : chain) {
        if (v >= tube.num_tree) {
            via = true;
            continue;
        }
        out.route.push_back({via, tube.points[v]});
        via = false;
    }
    return out;
}

double TreeSpace::geodesic_bypass_bound(const TreePoint& V, const TreePoint& W) const {
    Geodesic geo = tree_geodesic(V, W);
    return geo.D_pf + static_cast<double>(geo.decomposition.A()) * 2 * h_;
}

ConeQIConstants TreeSpace::coneqi_constants(const MetricConstants& c) const {
    ConeQIConstants q;
    q.h = h_;
    q.eta_min = std::numeric_limits<double>::infinity();
    for (long double l : slot_len_) q.eta_min = std::min(q.eta_min, static_cast<double>(l));
    if (slot_len_.empty()) q.eta_min = 0;
    if (!f_.rho()) return q;
    const double lrho = 2 * h_;
    q.K = std::max({1.0, 2 * c.C_cti_pf / lrho, 1 + 4 * h_ / q.eta_min});
    q.C = 2 * h_ / q.K;
    return q;
}

ElementClass TreeSpace::classify_element(const Circuit& c, int k_max) const {
    const MarkedGraph& g = f_.graph();
    if (c.edges.empty()) throw std::invalid_argument("trivial circuit");
    Circuit tight = cyclic_tighten(g, c.edges);
    if (tight.edges.size() != c.edges.size()) throw std::invalid_argument("circuit is not cyclically tight");
    ElementClass out;
    for (Edge e : c.edges) out.translation_length += f_.lpf(e);
    if (std::none_of(c.edges.begin(), c.edges.end(), [&](Edge e) { return f_.in_top(e); })) {
        out.kind = ElementKind::Elliptic;
        return out;
    }
    if (f_.rho() && f_.rho()->closed) {
        const auto& r = f_.rho()->rho.edges;
        if (c.edges.size() % r.size() == 0) {
            std::vector<Edge> pow;
            for (std::size_t k = 0; k < c.edges.size() / r.size(); ++k) pow.insert(pow.end(), r.begin(), r.end());
            Circuit pc{canonical_rotation(pow)};
            if (tight == pc || tight == reverse(g, pc)) {
                out.kind = ElementKind::LoxNielsenAxis;
                return out;
            }
        }
    }
    out.kind = ElementKind::Loxodromic;

    // Shortest edge path from the base vertex to the circuit, BFS in edge order.
    const int target = g.init[c.edges.front()];
    std::vector<Edge> via(g.num_vertices(), -1);
    std::vector<char> seen(g.num_vertices(), 0);
    std::deque<int> q{base_};
    seen[base_] = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (Edge e : g.out_edges(v))
            if (!seen[g.term[e]]) {
                seen[g.term[e]] = 1;
                via[g.term[e]] = e;
                q.push_back(g.term[e]);
            }
    }
    if (!seen[target]) throw structural_error("circuit is not reachable from the base vertex");
    std::vector<Edge> tau;
    for (int v = target; v != base_; v = g.init[via[v]]) tau.push_back(via[v]);
    std::reverse(tau.begin(), tau.end());

    const TreePoint x = tree_point(make_path(g, tau, base_));
    std::vector<Edge> word = tau;
    out.growth.push_back(0);
    for (int k = 1; k <= k_max; ++k) {
        word.insert(word.end(), c.edges.begin(), c.edges.end());
        TreePoint y = tree_point(tighten(g, word, base_));
        out.growth.push_back(cone_distance(x, y).value);
    }
    return out;
}

GrowthFit stable_growth_check(const ElementClass& e) {
    if (e.kind != ElementKind::Loxodromic)
        throw std::invalid_argument(std::string("stable_growth_check needs a loxodromic element, got ") +
                                    element_kind_name(e.kind));
    const auto& y = e.growth;
    if (y.size() < 2) throw std::invalid_argument("growth table needs at least two rows");
    // Lower convex hull of (k, y_k); its last segment gives the asymptotic slope.
    std::vector<int> hull;
    for (int k = 0; k < static_cast<int>(y.size()); ++k) {
        while (hull.size() >= 2) {
            int a = hull[hull.size() - 2], b = hull.back();
            double cross = (b - a) * (y[k] - y[a]) - (k - a) * (y[b] - y[a]);
            if (cross <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    const int a = hull[hull.size() - 2], b = hull.back();
    GrowthFit fit;
    fit.eta_hat = (y[b] - y[a]) / (b - a);
    for (int k = 0; k < static_cast<int>(y.size()); ++k) fit.kappa_hat = std::max(fit.kappa_hat, k * fit.eta_hat - y[k]);
    return fit;
}

namespace {

struct DistanceMatrix {
    int n = 0, slots = 0;
    std::vector<int> units;  // n*n*slots
    const int* at(int i, int j) const { return &units[(static_cast<std::size_t>(i) * n + j) * slots]; }
};

}  // namespace

HyperbolicityReport hyperbolicity_probe(const TreeSpace& T, const ConedBall& b, long long samples, std::uint64_t seed,
                                        int exhaustive_limit, int apsp_limit) {
    HyperbolicityReport rep;
    rep.seed = seed;
    const int S = T.slots();
    std::mt19937_64 rng(seed);

    std::vector<int> nodes(b.size());
    for (int i = 0; i < b.size(); ++i) nodes[i] = i;
    if (b.size() > apsp_limit) {
        std::shuffle(nodes.begin(), nodes.end(), rng);
        nodes.resize(300);
        std::sort(nodes.begin(), nodes.end());
    }
    const int n = static_cast<int>(nodes.size());
    rep.nodes = n;
    DistanceMatrix M{n, S, std::vector<int>(static_cast<std::size_t>(n) * n * S, 0)};
    for (int i = 0; i < n; ++i) {
        DistanceTable dt = ball_distances(T, b, nodes[i], nodes);
        for (int j = 0; j < n; ++j) {
            if (!dt.reached(nodes[j])) throw std::runtime_error("coned ball is disconnected");
            std::copy_n(&dt.half_units[static_cast<std::size_t>(nodes[j]) * S], S,
                        &M.units[(static_cast<std::size_t>(i) * n + j) * S]);
        }
    }

    std::vector<long long> s1(S), s2(S), s3(S), diff(S);
    auto defect = [&](int x, int y, int z, int w) {
        for (int s = 0; s < S; ++s) {
            s1[s] = M.at(x, y)[s] + M.at(z, w)[s];
            s2[s] = M.at(x, z)[s] + M.at(y, w)[s];
            s3[s] = M.at(x, w)[s] + M.at(y, z)[s];
        }
        std::vector<long long>* v[3] = {&s1, &s2, &s3};
        std::sort(v, v + 3, [&](auto* a, auto* c) { return T.evaluate(*a) > T.evaluate(*c); });
        for (int s = 0; s < S; ++s) diff[s] = (*v[0])[s] - (*v[1])[s];
        ++rep.tuples;
        rep.delta = std::max(rep.delta, static_cast<double>(T.evaluate(diff)) / 2);
    };
    if (n <= exhaustive_limit) {
        rep.exhaustive = true;
        for (int x = 0; x < n; ++x)
            for (int y = x + 1; y < n; ++y)
                for (int z = y + 1; z < n; ++z)
                    for (int w = z + 1; w < n; ++w) defect(x, y, z, w);
        return rep;
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (long long k = 0; k < samples; ++k) defect(pick(rng), pick(rng), pick(rng), pick(rng));
    return rep;
}

}  // namespace flarelab
