#pragma once

#include <random>
#include <string>
#include <vector>

#include "flarelab/io.hpp"

namespace testing {

inline std::string fixture_path(const std::string& name) {
    return std::string(FLARELAB_FIXTURES) + "/" + name + ".json";
}

inline flarelab::TopRep load_rep(const std::string& name) { return flarelab::load_document(fixture_path(name)); }

inline flarelab::TrackMap load_map(const std::string& name) { return flarelab::TrackMap(load_rep(name)); }

// Rose on `rank` petals at a single vertex named v; all edges in stratum 1.
inline flarelab::MarkedGraph rose(int rank) {
    std::vector<flarelab::EdgeSpec> specs;
    for (int k = 0; k < rank; ++k) specs.push_back({std::string(1, static_cast<char>('a' + k)), 0, 0, 1});
    return flarelab::MarkedGraph::build({"v"}, specs);
}

// Composable but untightened walk of `len` edges from `start`.
inline std::vector<flarelab::Edge> random_walk(const flarelab::MarkedGraph& g, int len, std::mt19937_64& rng,
                                               int start = 0) {
    std::vector<flarelab::Edge> w;
    int v = start;
    for (int k = 0; k < len; ++k) {
        auto out = g.out_edges(v);
        flarelab::Edge e = out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)];
        w.push_back(e);
        v = g.term[e];
    }
    return w;
}

// Free reduction one cancelling pair per pass, rescanning from the left.
inline std::vector<flarelab::Edge> repeated_scan(const flarelab::MarkedGraph& g, std::vector<flarelab::Edge> w) {
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = 0; k + 1 < w.size(); ++k)
            if (g.rev[w[k]] == w[k + 1]) {
                w.erase(w.begin() + static_cast<long>(k), w.begin() + static_cast<long>(k) + 2);
                changed = true;
                break;
            }
    }
    return w;
}

}  // namespace testing
