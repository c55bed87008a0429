#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flarelab/coned_tree.hpp"

namespace flarelab {

struct SuspensionPoint {
    int node = 0;   // ConedBall node id
    int level = 0;
    bool operator==(const SuspensionPoint&) const = default;
};

// Copies of one ConedBall at integer levels a..b. Horizontal arcs keep the
// fiber weights; a vertical arc of weight 1 joins (v, k) to (f_T*(v), k+1)
// whenever the image of v lies in the ball.
struct SuspensionWindow {
    int a = 0, b = 0;
    ConedBall ball;
    std::vector<int> image;   // per ball node, -1 when the image leaves the ball or is ambiguous
    int escapes = 0;          // tree nodes whose image leaves the ball
    long long vertical_edges = 0;

    int levels() const { return b - a + 1; }
    int per_level() const { return ball.size(); }
    int id(const SuspensionPoint& p) const { return (p.level - a) * per_level() + p.node; }
};

// With strict set, an image outside the ball is a truncation_error naming the
// vertex; otherwise the vertex just gets no vertical arc.
SuspensionWindow build_window(const TreeSpace& T, ConedBall ball, int a, int b, bool strict = false);

// Shortest-path distances in the layered graph from one point.
std::vector<long double> suspension_distances(const TreeSpace& T, const SuspensionWindow& w,
                                              const SuspensionPoint& from);
long double suspension_distance(const TreeSpace& T, const SuspensionWindow& w, const SuspensionPoint& x,
                                const SuspensionPoint& y);

struct SectionConfig {
    int R = 2;
    double k2 = 2;
    double nu2 = 1.2;
    int samples = 200;
    int start_radius = 3;         // start vertices within this many T-edges of the base point
    double perturb_prob = 0.5;    // per-step chance of a one-edge move off the exact orbit
    std::uint64_t seed = 1;
};

struct Flaring2Counterexample {
    EdgePath start1, start2;
    double middle = 0;
    double ends = 0;
};

struct Flaring2Report {
    SectionConfig config;
    long long pairs = 0;
    long long exact_pairs = 0;
    double max_step = 0;       // largest per-step displacement bound seen
    long long rejected = 0;    // sections that were not k2-quasigeodesic
    long long violators = 0;
    double max_violator = -1;
    std::optional<double> A2;
    std::vector<Flaring2Counterexample> counterexamples;
};

// Sections run over levels m-R..m+R. Each step is f_T* of the previous point,
// possibly moved one T-edge; its displacement is bounded by 1 plus that
// move's fiber length and must be at most 2 k2.
Flaring2Report verify_flaring2(const TreeSpace& T, const SectionConfig& cfg);

}  // namespace flarelab
