#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flarelab/graph_core.hpp"

namespace flarelab {

// Raised when a stratum fits none of the allowed kinds, or a declared
// object (Nielsen path, twist data) fails its checks.
class taxonomy_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Matrix = std::vector<std::vector<long long>>;

enum class StratumKind { EG, NegFixed, NegLinear, NegSuperlinear, Zero };
const char* kind_name(StratumKind k);

struct SplitTerm {
    enum class Kind { Edge, Nielsen, Exceptional, Zero };
    Kind kind = Kind::Edge;
    EdgePath path;
};
const char* term_kind_name(SplitTerm::Kind k);

// A connecting path inside a zero stratum, with the declared splitting of
// its image.
struct TakenPath {
    EdgePath path;
    std::vector<SplitTerm> image_terms;
};

struct DeclaredNielsen {
    EdgePath path;
    std::optional<std::size_t> split;
};

struct TopRep {
    MarkedGraph graph;
    std::vector<int> vertex_image;
    std::vector<EdgePath> edge_image;  // indexed by oriented edge
    std::optional<DeclaredNielsen> nielsen;
    std::map<Edge, std::vector<SplitTerm>> splittings;  // keyed by positive edge, splits f(E)
    std::vector<TakenPath> taken_paths;
    bool ct_declared = false;
    int base_vertex = -1;
    std::string name;

    // images[k] is the image of positive edge 2k; reverses are filled in.
    static TopRep build(MarkedGraph g, std::vector<int> vertex_image, const std::vector<EdgePath>& images);
};

std::vector<Violation> validate_toprep(const TopRep& f);

struct StratumInfo {
    int index = 0;
    StratumKind kind = StratumKind::Zero;
    std::vector<Edge> edges;  // positive edges, index order
    Matrix transition;
    double lambda = 1.0;
    std::vector<double> eigenvector;  // aligned with `edges`, EG only
    EdgePath twist_path;              // NEG-linear only
    Circuit twist_circuit;
    int twist_coefficient = 0;
};

struct PfResult {
    double lambda = 0;
    std::vector<double> vector;  // left eigenvector, min entry 1
    double residual = 0;
};

bool is_irreducible(const Matrix& m);
PfResult pf_spectrum(const Matrix& m);
// Largest real eigenvalue over the irreducible diagonal blocks; works on
// reducible input.
double spectral_radius(const Matrix& m);
// Coefficients of det(xI - M), highest degree first.
std::vector<long long> characteristic_polynomial(const Matrix& m);

EdgePath apply_map(const TopRep& f, const EdgePath& p, int k = 1);
// Image of an arbitrary composable edge sequence, tightened.
EdgePath apply_map_seq(const TopRep& f, const std::vector<Edge>& seq, int start_vertex);
int map_vertex(const TopRep& f, int v, int k = 1);

// Largest cancellation between f^k_#(E) and f^k_#(E') over all composable
// tight pairs of edges.
int bcc(const TopRep& f, int k = 1);
EdgePath apply_map_trunc(const TopRep& f, const EdgePath& p, int k, int bcc_k);
EdgePath apply_map_trunc(const TopRep& f, const EdgePath& p, int k);

Matrix transition_matrix(const TopRep& f, const std::vector<Edge>& edges);
std::vector<StratumInfo> classify_strata(const TopRep& f);

struct TurnData {
    std::vector<Edge> df;    // -1 when the image is degenerate
    std::vector<int> gate;   // gate id per oriented edge
    std::vector<std::pair<Edge, Edge>> illegal;  // height-u illegal turns, first < second
};

TurnData turn_analysis(const TopRep& f, int top_stratum);

struct NielsenCertificate {
    EdgePath rho;
    EdgePath alpha;
    EdgePath beta;
    std::size_t split = 0;
    bool closed = false;
    bool start_in_lower = false;
    bool end_in_lower = false;
    double l_alpha = 0;
    double l_beta = 0;
};

struct NielsenVerdict {
    std::optional<NielsenCertificate> certificate;
    std::string refusal;
};

// One term of a decomposition into single edges and whole copies of rho.
struct Piece {
    bool is_rho = false;
    Edge edge = -1;  // when !is_rho
    int sign = 1;    // +1 for rho, -1 for its reverse
    bool operator==(const Piece&) const = default;
};

// A validated TopRep with its derived data: strata, top spectrum,
// eigenlengths, turns and the certified Nielsen path if one was declared.
class TrackMap {
public:
    explicit TrackMap(TopRep f);

    const TopRep& rep() const { return rep_; }
    const MarkedGraph& graph() const { return rep_.graph; }
    const std::vector<StratumInfo>& strata() const { return strata_; }
    int top() const { return top_; }
    double lambda() const { return lambda_; }
    double lpf(Edge e) const { return lpf_[e]; }
    const std::vector<double>& lpf_table() const { return lpf_; }
    bool in_top(Edge e) const { return rep_.graph.stratum[e] == top_; }
    const TurnData& turns() const { return turns_; }
    const std::optional<NielsenCertificate>& rho() const { return rho_; }
    const StratumInfo& stratum_info(int i) const { return strata_.at(i - 1); }
    int bcc1() const { return bcc1_; }

    bool is_illegal_turn(Edge a, Edge b) const;

private:
    TopRep rep_;
    std::vector<StratumInfo> strata_;
    int top_ = 0;
    double lambda_ = 1.0;
    std::vector<double> lpf_;
    TurnData turns_;
    std::optional<NielsenCertificate> rho_;
    int bcc1_ = 0;
};

double eigenlength(const TrackMap& f, const EdgePath& p);
// Number of turns between consecutive edges of p lying in the top stratum
// and in a common gate.
int illegal_turn_count(const TrackMap& f, const EdgePath& p);
bool is_u_legal(const TrackMap& f, const EdgePath& p);

NielsenVerdict verify_nielsen(const TrackMap& f, const EdgePath& candidate,
                              std::optional<std::size_t> declared_split = std::nullopt);
// Tight paths of length <= max_len that verify_nielsen certifies.
std::vector<EdgePath> search_nielsen(const TrackMap& f, int max_len);

struct FixedCircuitResult {
    bool fixed = false;
    std::optional<std::vector<Piece>> decomposition;  // from the canonical rotation `rotation`
    std::size_t rotation = 0;
    std::string note;
};
FixedCircuitResult is_fixed_circuit(const TrackMap& f, const Circuit& c);

}  // namespace flarelab
