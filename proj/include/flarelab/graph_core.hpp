#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace flarelab {

// Thrown when a sequence of edges cannot be read as a path.
class structural_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Oriented edge index. Edges built by MarkedGraph::build come in pairs
// (2k, 2k+1), but validate_graph works on whatever `rev` holds.
using Edge = int;

struct EdgeSpec {
    std::string name;
    int init = 0;
    int term = 0;
    int stratum = 1;
};

struct MarkedGraph {
    std::vector<std::string> vertex_names;
    std::vector<Edge> rev;
    std::vector<int> init;
    std::vector<int> term;
    std::vector<int> stratum;
    std::vector<std::string> names;

    static MarkedGraph build(std::vector<std::string> vertices, const std::vector<EdgeSpec>& edges);

    int num_vertices() const { return static_cast<int>(vertex_names.size()); }
    int num_edges() const { return static_cast<int>(rev.size()); }
    int num_strata() const;

    // Signed external id: +k for edge 2(k-1), -k for its reverse.
    static int signed_id(Edge e) { return (e % 2 == 0) ? e / 2 + 1 : -(e / 2 + 1); }
    Edge from_signed(int id) const;
    bool is_positive(Edge e) const { return e % 2 == 0; }
    Edge positive(Edge e) const { return e % 2 == 0 ? e : rev[e]; }
    std::string label(Edge e) const;

    // Oriented edges whose initial vertex is v, in index order.
    std::vector<Edge> out_edges(int v) const;

    bool operator==(const MarkedGraph&) const = default;
};

struct EdgePath {
    std::vector<Edge> edges;
    int start = -1;
    int end = -1;

    bool empty() const { return edges.empty(); }
    std::size_t size() const { return edges.size(); }
    bool operator==(const EdgePath&) const = default;
    auto operator<=>(const EdgePath&) const = default;
};

struct Circuit {
    std::vector<Edge> edges;
    bool operator==(const Circuit&) const = default;
};

EdgePath degenerate_path(int vertex);

// Checks composability and records endpoints; `vertex_if_empty` is used for
// the empty sequence.
EdgePath make_path(const MarkedGraph& g, std::vector<Edge> edges, int vertex_if_empty = -1);
EdgePath path_from_ids(const MarkedGraph& g, const std::vector<int>& ids, int vertex_if_empty = -1);
std::vector<int> path_ids(const EdgePath& p);

bool is_tight(const EdgePath& p, const MarkedGraph& g);
EdgePath tighten(const MarkedGraph& g, const std::vector<Edge>& seq, int vertex_if_empty);
EdgePath tighten(const MarkedGraph& g, const EdgePath& p);
EdgePath reverse(const MarkedGraph& g, const EdgePath& p);
// Concatenation without tightening; throws if end(p) != start(q).
EdgePath concat(const EdgePath& p, const EdgePath& q);
// tighten(concat(p, q))
EdgePath join(const MarkedGraph& g, const EdgePath& p, const EdgePath& q);
EdgePath subpath(const EdgePath& p, std::size_t from, std::size_t to, const MarkedGraph& g);

Circuit cyclic_tighten(const MarkedGraph& g, const std::vector<Edge>& seq);
Circuit reverse(const MarkedGraph& g, const Circuit& c);
std::vector<Edge> canonical_rotation(std::vector<Edge> c);

MarkedGraph subgraph(const MarkedGraph& g, int i);

struct Violation {
    std::string code;
    std::string message;
};
std::vector<Violation> validate_graph(const MarkedGraph& g);

// Visits every tight path with 1..max_len edges (and, if include_empty, the
// degenerate path at each vertex). Paths are produced in DFS order.
void for_each_tight_path(const MarkedGraph& g, int max_len, bool include_empty,
                         const std::function<void(const EdgePath&)>& fn);

// Uniform random tight path of exactly `len` edges from `start` (any vertex if
// start < 0); stops early at a dead end.
EdgePath random_tight_path(const MarkedGraph& g, int len, std::mt19937_64& rng, int start = -1);

}  // namespace flarelab
