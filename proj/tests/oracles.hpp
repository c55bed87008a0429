#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "flarelab/path_metrics.hpp"

namespace testing {

using namespace flarelab;

// Greedy left-to-right scan: a window equal to rho or its reverse becomes one
// piece, anything else is a single edge.
inline std::vector<Piece> window_scan(const TrackMap& f, const EdgePath& p) {
    const auto& rho = f.rho()->rho.edges;
    const auto rbar = reverse(f.graph(), f.rho()->rho).edges;
    std::vector<Piece> out;
    std::size_t i = 0;
    auto at = [&](const std::vector<Edge>& w) {
        return i + w.size() <= p.size() && std::equal(w.begin(), w.end(), p.edges.begin() + static_cast<long>(i));
    };
    while (i < p.size()) {
        if (at(rho)) {
            out.push_back({true, -1, 1});
            i += rho.size();
        } else if (at(rbar)) {
            out.push_back({true, -1, -1});
            i += rho.size();
        } else {
            out.push_back({false, p.edges[i], 1});
            ++i;
        }
    }
    return out;
}

// All start positions of rho or rho-bar windows, overlapping or not.
inline std::vector<std::size_t> all_windows(const TrackMap& f, const EdgePath& p) {
    const auto& rho = f.rho()->rho.edges;
    const auto rbar = reverse(f.graph(), f.rho()->rho).edges;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + rho.size() <= p.size(); ++i) {
        auto it = p.edges.begin() + static_cast<long>(i);
        if (std::equal(rho.begin(), rho.end(), it) || std::equal(rbar.begin(), rbar.end(), it)) out.push_back(i);
    }
    return out;
}

// Random tight path with copies of rho / rho-bar spliced between rho-free chunks.
inline EdgePath spliced(const TrackMap& f, std::mt19937_64& rng) {
    const MarkedGraph& g = f.graph();
    const EdgePath rho = f.rho()->rho;
    const EdgePath rbar = reverse(g, rho);
    for (;;) {
        std::vector<Edge> w;
        const int parts = std::uniform_int_distribution<int>(1, 5)(rng);
        for (int k = 0; k < parts; ++k) {
            const int v = w.empty() ? rho.start : g.term[w.back()];
            auto chunk = random_tight_path(g, std::uniform_int_distribution<int>(0, 4)(rng), rng, v);
            w.insert(w.end(), chunk.edges.begin(), chunk.edges.end());
            const EdgePath& r = rng() % 2 ? rho : rbar;
            w.insert(w.end(), r.edges.begin(), r.edges.end());
        }
        EdgePath p = make_path(g, w, rho.start);
        if (is_tight(p, g)) return p;
    }
}

// Number of rho / rho-bar pieces in the greedy window scan.
inline int window_rho_count(const TrackMap& f, const EdgePath& p) {
    if (!f.rho()) return 0;
    int n = 0;
    for (const auto& x : window_scan(f, p)) n += x.is_rho;
    return n;
}

}  // namespace testing
