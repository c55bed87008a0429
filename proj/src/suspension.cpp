#include "flarelab/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

namespace flarelab {

SuspensionWindow build_window(const TreeSpace& T, ConedBall ball, int a, int b, bool strict) {
    if (b < a) throw std::invalid_argument("suspension window needs a <= b");
    SuspensionWindow w;
    w.a = a;
    w.b = b;
    w.ball = std::move(ball);
    const ConedBall& B = w.ball;
    w.image.assign(B.size(), -1);
    for (int v = 0; v < B.num_tree; ++v) {
        const int img = B.find(T.lift_apply(B.points[v]));
        if (img < 0) {
            if (strict)
                throw truncation_error("image of vertex [" + std::to_string(v) + "] leaves the window");
            ++w.escapes;
        }
        w.image[v] = img;
    }
    // A cone point goes to the one cone holding the images of all its members.
    std::vector<std::vector<int>> cones_at(B.num_tree);
    for (int c = 0; c < B.num_cones; ++c)
        for (int m : B.cone_members[c]) cones_at[m].push_back(c);
    for (int c = 0; c < B.num_cones; ++c) {
        std::vector<int> common;
        bool first = true;
        for (int m : B.cone_members[c]) {
            const int im = w.image[m];
            if (im < 0) {
                common.clear();
                break;
            }
            if (first) {
                common = cones_at[im];
                first = false;
                continue;
            }
            std::vector<int> keep;
            for (int x : common)
                if (std::find(cones_at[im].begin(), cones_at[im].end(), x) != cones_at[im].end()) keep.push_back(x);
            common = std::move(keep);
        }
        if (common.size() == 1) w.image[B.num_tree + c] = B.num_tree + common.front();
    }
    const long long mapped = std::count_if(w.image.begin(), w.image.end(), [](int x) { return x >= 0; });
    w.vertical_edges = static_cast<long long>(b - a) * mapped;
    return w;
}

std::vector<long double> suspension_distances(const TreeSpace& T, const SuspensionWindow& w,
                                              const SuspensionPoint& from) {
    const ConedBall& B = w.ball;
    const int n = w.per_level();
    const int total = n * w.levels();
    if (from.level < w.a || from.level > w.b || from.node < 0 || from.node >= n)
        throw std::out_of_range("suspension point outside the window");
    // Vertical arcs are undirected, so each node also needs its preimages.
    std::vector<std::vector<int>> pre(n);
    for (int v = 0; v < n; ++v)
        if (w.image[v] >= 0) pre[w.image[v]].push_back(v);

    std::vector<long double> dist(total, std::numeric_limits<long double>::infinity());
    using Item = std::pair<long double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[w.id(from)] = 0;
    pq.push({0, w.id(from)});
    auto relax = [&](int to, long double d) {
        if (d < dist[to]) {
            dist[to] = d;
            pq.push({d, to});
        }
    };
    while (!pq.empty()) {
        auto [d, id] = pq.top();
        pq.pop();
        if (d > dist[id]) continue;
        const int lvl = id / n, v = id % n;
        for (const auto& arc : B.adj[v])
            relax(lvl * n + arc.to, d + (arc.slot < 0 ? static_cast<long double>(T.h()) : T.slot_length(arc.slot)));
        if (lvl + 1 < w.levels() && w.image[v] >= 0) relax((lvl + 1) * n + w.image[v], d + 1);
        if (lvl > 0)
            for (int u : pre[v]) relax((lvl - 1) * n + u, d + 1);
    }
    return dist;
}

long double suspension_distance(const TreeSpace& T, const SuspensionWindow& w, const SuspensionPoint& x,
                                const SuspensionPoint& y) {
    return suspension_distances(T, w, x)[w.id(y)];
}

namespace {

struct Section {
    std::vector<TreePoint> points;  // levels m-R..m+R
    double max_step = 0;
    bool exact = true;
};

Section make_section(const TreeSpace& T, const TreePoint& start, int steps, double p, std::mt19937_64& rng) {
    Section s;
    s.points.push_back(start);
    std::bernoulli_distribution move(p);
    for (int k = 0; k < steps; ++k) {
        TreePoint next = T.lift_apply(s.points.back());
        double step = 1;
        if (p > 0 && move(rng)) {
            auto nb = T.neighbors(next);
            if (!nb.empty()) {
                TreePoint moved = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
                step += T.cone_distance(next, moved).value;
                next = std::move(moved);
                s.exact = false;
            }
        }
        s.max_step = std::max(s.max_step, step);
        s.points.push_back(std::move(next));
    }
    return s;
}

}  // namespace

Flaring2Report verify_flaring2(const TreeSpace& T, const SectionConfig& cfg) {
    if (!(cfg.nu2 > 1)) throw std::invalid_argument("nu2 must exceed 1");
    if (cfg.R < 1) throw std::invalid_argument("R must be >= 1");
    Flaring2Report rep;
    rep.config = cfg;
    std::mt19937_64 rng(cfg.seed);
    ConedBall starts = T.coned_ball(T.root(), cfg.start_radius);
    std::uniform_int_distribution<int> pick(0, starts.num_tree - 1);

    struct Row {
        double middle, ends;
        EdgePath s1, s2;
    };
    std::vector<Row> rows;
    for (int k = 0; k < cfg.samples; ++k) {
        // Half the pairs follow exact orbits.
        const double p = k % 2 == 0 ? 0.0 : cfg.perturb_prob;
        const TreePoint& v = starts.points[pick(rng)];
        const TreePoint& u = starts.points[pick(rng)];
        Section s1 = make_section(T, v, 2 * cfg.R, p, rng);
        Section s2 = make_section(T, u, 2 * cfg.R, p, rng);
        const double step = std::max(s1.max_step, s2.max_step);
        rep.max_step = std::max(rep.max_step, step);
        if (step > 2 * cfg.k2) {
            ++rep.rejected;
            continue;
        }
        ++rep.pairs;
        rep.exact_pairs += s1.exact && s2.exact;
        const double lo = T.cone_distance(s1.points.front(), s2.points.front()).value;
        const double mid = T.cone_distance(s1.points[cfg.R], s2.points[cfg.R]).value;
        const double hi = T.cone_distance(s1.points.back(), s2.points.back()).value;
        rows.push_back({mid, std::max(lo, hi), v.base_path, u.base_path});
    }
    std::vector<double> values;
    for (const Row& r : rows) {
        values.push_back(r.middle);
        if (cfg.nu2 * r.middle > r.ends + 1e-9) {
            ++rep.violators;
            rep.max_violator = std::max(rep.max_violator, r.middle);
        }
    }
    std::sort(values.begin(), values.end());
    if (rep.violators == 0) {
        rep.A2 = 0.0;
    } else {
        auto it = std::upper_bound(values.begin(), values.end(), rep.max_violator);
        if (it != values.end()) rep.A2 = *it;
        std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.middle > y.middle; });
        for (const Row& r : rows) {
            if (rep.counterexamples.size() >= 3) break;
            if (cfg.nu2 * r.middle > r.ends + 1e-9) rep.counterexamples.push_back({r.s1, r.s2, r.middle, r.ends});
        }
    }
    return rep;
}

}  // namespace flarelab
