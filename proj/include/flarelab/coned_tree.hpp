#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flarelab/path_metrics.hpp"

namespace flarelab {

class configuration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class truncation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A vertex of T: a tight path from the base vertex with its terminal run of
// lower-stratum edges removed.
struct TreePoint {
    EdgePath base_path;
    bool operator==(const TreePoint& o) const { return base_path.edges == o.base_path.edges; }
    bool operator<(const TreePoint& o) const { return base_path.edges < o.base_path.edges; }
};

// Length in T*: half-unit counts per positive top edge. The value is
// sum(count[s] * l_PF(edge s)) / 2, so a T-edge adds 2 to its slot and a cone
// edge adds the edge counts of rho.
struct ExactLength {
    std::vector<long long> half_units;
    long double value = 0;
    bool operator==(const ExactLength& o) const { return half_units == o.half_units; }
};

std::uint64_t path_hash(const std::vector<Edge>& v);

// Hash index from edge sequences to node ids; the sequences themselves live
// in the caller's storage. Collisions go to an ordered overflow map.
class PathIndex {
public:
    int find(const std::vector<Edge>& key, const std::vector<TreePoint>& store) const;
    void insert(const std::vector<Edge>& key, int id, const std::vector<TreePoint>& store);
    std::size_t size() const { return primary_.size() + overflow_.size(); }

private:
    std::unordered_map<std::uint64_t, int> primary_;
    std::map<std::vector<Edge>, int> overflow_;
};

// Finite window of T* with cone points. Nodes [0, num_tree) are T-vertices,
// the rest are cone points.
struct ConedBall {
    struct Arc {
        int to;
        int slot;  // top-edge slot for a T-edge, -1 for a cone edge
    };
    TreePoint center;
    int radius = 0;
    std::vector<TreePoint> points;  // tree nodes only
    std::vector<int> depth;         // T-edge distance from the nearest seed
    int num_tree = 0;
    int num_cones = 0;
    std::vector<std::vector<Arc>> adj;
    std::vector<std::vector<int>> cone_members;
    bool truncated = false;  // lower-stratum enumeration hit its cap
    PathIndex index;

    int size() const { return static_cast<int>(adj.size()); }
    int find(const TreePoint& p) const { return index.find(p.base_path.edges, points); }
};

// Single-source distances on a ball. value[i] is +inf for unreached nodes.
struct DistanceTable {
    int slots = 0;
    std::vector<long double> value;
    std::vector<int> half_units;  // node-major, `slots` entries per node
    std::vector<int> parent;
    bool reached(int i) const;
    ExactLength at(int i) const;
};

struct Geodesic {
    EdgePath path;  // tighten(reverse(V) . W)
    MuNu decomposition;
    long long D_u = 0;
    double D_pf = 0;
    std::vector<TreePoint> vertices;  // T-vertices along the geodesic, in order
};

struct RouteStep {
    bool via_cone = false;  // reached through a cone point rather than a T-edge
    TreePoint point;
};

struct ConeDistance {
    ExactLength d_star;
    double value = 0;
    double geodesic_bypass_bound = 0;  // bypass sum along the T-geodesic, an upper bound
    std::vector<RouteStep> route;
    int tube_nodes = 0;
    bool truncated = false;
};

struct ConeQIConstants {
    double K = 1;
    double C = 0;
    double h = 0;
    double eta_min = 0;
};

enum class ElementKind { Elliptic, LoxNielsenAxis, Loxodromic };
const char* element_kind_name(ElementKind k);

struct ElementClass {
    ElementKind kind = ElementKind::Elliptic;
    double translation_length = 0;  // l_PF of the circuit
    std::vector<double> growth;     // d*(x, Delta^k x), k = 0..k_max
};

struct GrowthFit {
    double eta_hat = 0;
    double kappa_hat = 0;
};

struct HyperbolicityReport {
    double delta = 0;
    bool exhaustive = false;
    long long tuples = 0;
    int nodes = 0;
    std::uint64_t seed = 0;
};

// T and T* for a TrackMap whose base vertex is f-fixed.
class TreeSpace {
public:
    explicit TreeSpace(const TrackMap& f, int lower_cap = 4);

    const TrackMap& map() const { return f_; }
    int base() const { return base_; }
    double h() const { return h_; }
    int slots() const { return static_cast<int>(slot_edges_.size()); }
    int slot_of(Edge e) const { return slot_[e]; }
    long double slot_length(int s) const { return slot_len_[s]; }

    TreePoint tree_point(const EdgePath& p) const;
    // Direct form of the equality relation: tighten(reverse(p) . q) stays in G_{u-1}.
    bool same_point(const EdgePath& p, const EdgePath& q) const;
    TreePoint root() const;

    // Adjacent T-vertices, in a deterministic order. Sets *truncated when the
    // lower-stratum enumeration reached its cap.
    std::vector<TreePoint> neighbors(const TreePoint& x, bool* truncated = nullptr) const;

    Geodesic tree_geodesic(const TreePoint& V, const TreePoint& W) const;
    int tree_edge_distance(const TreePoint& V, const TreePoint& W) const;

    TreePoint act(const EdgePath& loop, const TreePoint& x) const;
    TreePoint lift_apply(const TreePoint& x) const;
    EdgePath phi(const EdgePath& loop) const;

    ConeDistance cone_distance(const TreePoint& V, const TreePoint& W) const;
    double geodesic_bypass_bound(const TreePoint& V, const TreePoint& W) const;

    // Nodes within `radius` T-edges of the center.
    ConedBall coned_ball(const TreePoint& center, int radius, std::size_t max_nodes = 4000000) const;
    // Nodes within `radius` T-edges of any listed vertex.
    ConedBall coned_neighborhood(const std::vector<TreePoint>& seeds, int radius,
                                 std::size_t max_nodes = 4000000) const;

    ExactLength zero_length() const;
    long double evaluate(const std::vector<long long>& half_units) const;

    ConeQIConstants coneqi_constants(const MetricConstants& c) const;

    ElementClass classify_element(const Circuit& c, int k_max = 12) const;

    // Lower-stratum tight paths from v with at most lower_cap edges, the empty
    // path first.
    const std::vector<EdgePath>& lower_paths(int v) const { return lower_paths_[v]; }

private:
    // Neighbors paired with the top edge crossed to reach them.
    std::vector<std::pair<TreePoint, Edge>> steps(const TreePoint& x, bool* truncated) const;
    void add_cones(ConedBall& b) const;

    const TrackMap& f_;
    int base_ = -1;
    int lower_cap_ = 4;
    double h_ = 0;
    std::vector<int> slot_;               // per oriented edge, -1 outside the top stratum
    std::vector<Edge> slot_edges_;
    std::vector<long double> slot_len_;
    std::vector<long long> rho_counts_;   // half units of one cone edge
    std::vector<std::vector<EdgePath>> lower_paths_;
    std::vector<bool> lower_capped_;      // some lower path from v is longer than lower_cap
};

// Dijkstra from `source`. With `targets` given, stops once all are settled.
DistanceTable ball_distances(const TreeSpace& T, const ConedBall& b, int source,
                             const std::vector<int>& targets = {});

HyperbolicityReport hyperbolicity_probe(const TreeSpace& T, const ConedBall& b, long long samples = 200000,
                                        std::uint64_t seed = 1, int exhaustive_limit = 40,
                                        int apsp_limit = 2500);

GrowthFit stable_growth_check(const ElementClass& e);

}  // namespace flarelab
