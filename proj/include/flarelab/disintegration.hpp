#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "flarelab/rtt_map.hpp"

namespace flarelab {

using BigInt = boost::multiprecision::cpp_int;
using Tuple = std::vector<long long>;

// A declared splitting term that fails its template, or a missing declaration.
class splitting_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QETerm {
    enum class Kind { Edge, Nielsen, Exceptional, Zero, QE };
    Kind kind = Kind::Edge;
    EdgePath path;
    // QE terms only: path = e_i w^p reverse(e_j).
    Edge e_i = -1, e_j = -1;
    int p = 0;
};
const char* qe_kind_name(QETerm::Kind k);

struct QESplitting {
    std::vector<QETerm> terms;
};

// Checks each term against its template and, when `target` is given, that the
// terms concatenate to it. `who` names the splitting in error messages.
void validate_terms(const TrackMap& f, const std::vector<SplitTerm>& terms, const std::optional<EdgePath>& target,
                    const std::string& who);

// Conglomerates maximal runs e_i (w-powers) reverse(e_j) with e_i, e_j linear
// over the same twist path w.
QESplitting qe_splitting(const TrackMap& f, const std::vector<SplitTerm>& terms,
                         const std::optional<EdgePath>& target = std::nullopt, const std::string& who = "splitting");

struct AlmostInvariantPartition {
    std::vector<std::vector<int>> components;  // stratum indices of each X_s, ascending
    std::vector<std::vector<Edge>> edges;      // positive edges of each X_s
    std::vector<int> home;                     // by stratum index (slot 0 unused); -1 for fixed strata
    std::vector<std::pair<int, int>> relation; // (i, j) for H_i > H_j
    int S() const { return static_cast<int>(components.size()); }
};

// Components are ordered with the one holding the top stratum first, the rest
// by ascending largest stratum index.
AlmostInvariantPartition almost_invariant_partition(const TrackMap& f);

struct QuasiTwistTriple {
    int r = 0;          // component whose short path produced the QE term
    Edge e_i = -1;      // positive edges, e_i < e_j
    Edge e_j = -1;
    int d_i = 0, d_j = 0;
    int s = 0, t = 0;   // homes of e_i and e_j
    int p = 0;          // |exponent| of w in the QE term
    bool operator==(const QuasiTwistTriple&) const = default;
};

std::vector<QuasiTwistTriple> quasi_twist_triples(const TrackMap& f, const AlmostInvariantPartition& P);

// Everything the admissibility computations need, derived once.
struct Disintegration {
    const TrackMap* f = nullptr;
    AlmostInvariantPartition partition;
    std::vector<QuasiTwistTriple> triples;
    // One row per triple: a_r (d_i - d_j) - a_s d_i + a_t d_j = 0.
    std::vector<std::vector<BigInt>> relations;
    int S() const { return partition.S(); }
};
Disintegration disintegrate(const TrackMap& f);

struct AdmissibilityVerdict {
    bool admissible = false;
    std::optional<QuasiTwistTriple> violated;
    std::string reason;
};
// Throws std::invalid_argument when the tuple length is not S.
AdmissibilityVerdict is_admissible(const Disintegration& D, const Tuple& a);
// Relations only; entries may be negative.
bool in_lattice(const Disintegration& D, const std::vector<BigInt>& a);

struct Lattice {
    std::vector<std::vector<BigInt>> basis;  // rows, Hermite normal form
    int rank() const { return static_cast<int>(basis.size()); }
};
Lattice admissible_lattice(const Disintegration& D);
// Writes v = plus - minus with plus, minus nonnegative lattice members.
std::pair<std::vector<BigInt>, std::vector<BigInt>> as_difference(const Disintegration& D, const std::vector<BigInt>& v);

TopRep build_f_a(const Disintegration& D, const Tuple& a);

struct SemigroupReport {
    bool holds = true;
    int edges_checked = 0;
    std::vector<Edge> failures;
};
// f^a_#(f^b_#(E)) = f^{a+b}_#(E) on every edge.
SemigroupReport verify_semigroup_identity(const Disintegration& D, const Tuple& a, const Tuple& b);

struct CoordinateVector {
    std::vector<int> strata;        // NEG-linear and EG strata, ascending
    std::vector<BigInt> omega;
    struct Difference {
        int i, j;
        BigInt value;
    };
    std::vector<Difference> differences;  // omega_i - omega_j over linear strata sharing a twist path
    bool operator==(const CoordinateVector& o) const;
};
// Needs an admissible tuple.
CoordinateVector coordinate_hom(const Disintegration& D, const Tuple& a);
// Any lattice member, negative entries allowed.
CoordinateVector coordinate_hom_lattice(const Disintegration& D, const std::vector<BigInt>& a);

struct ExpansionRow {
    int stratum = 0;
    double observed = 0;   // spectral radius of f^a on the stratum
    double expected = 0;   // lambda_i ^ a_s
    double rel_error = 0;
};
std::vector<ExpansionRow> expansion_consistency(const Disintegration& D, const Tuple& a);

}  // namespace flarelab
