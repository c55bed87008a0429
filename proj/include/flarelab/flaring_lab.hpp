#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flarelab/path_metrics.hpp"

namespace flarelab {

enum class PathFn { Lu, Lpf };
const char* path_fn_name(PathFn t);
double path_length(const TrackMap& f, const EdgePath& p, PathFn tag);

struct CoarseSimWitness {
    EdgePath alpha;
    EdgePath omega;
};

// All tight paths p with |p| <= radius and L(p) <= eta, degenerate ones
// included, bucketed by endpoint. radius = floor(eta * K_quasi + l_u(rho) + 2).
struct PerturbationSet {
    double eta = 0;
    PathFn tag = PathFn::Lu;
    int radius = 0;
    std::vector<std::vector<EdgePath>> by_end;    // by terminal vertex
    std::vector<std::vector<EdgePath>> by_start;  // by initial vertex
    std::size_t size = 0;
};
PerturbationSet perturbation_set(const TrackMap& f, const MetricConstants& c, double eta, PathFn tag,
                                 std::size_t cap = 500000);

// Looks for alpha, omega in the perturbation set with gamma = [alpha beta omega].
std::optional<CoarseSimWitness> coarse_sim(const TrackMap& f, const PerturbationSet& P, const EdgePath& beta,
                                           const EdgePath& gamma);

struct PseudoOrbit {
    int R = 0;
    double eta = 0;
    PathFn tag = PathFn::Lu;
    std::vector<EdgePath> beta;                   // beta[r + R] for -R <= r <= R
    std::vector<CoarseSimWitness> witnesses;      // witnesses[k]: beta[k+1] = [alpha f_#(beta[k]) omega]
    const EdgePath& at(int r) const { return beta[static_cast<std::size_t>(r + R)]; }
};

PseudoOrbit exact_orbit(const TrackMap& f, const EdgePath& gamma, int R, PathFn tag = PathFn::Lu);
std::vector<PseudoOrbit> sample_pseudo_orbits(const TrackMap& f, const PerturbationSet& P, int R, int count,
                                              std::uint64_t seed, int max_start_length = 8);
// Re-derives each witness with coarse_sim.
bool validate_orbit(const TrackMap& f, const PerturbationSet& P, const PseudoOrbit& o);

struct ProbeScope {
    int max_length = 10;
    long long sample_count = 0;
    std::uint64_t seed = 0;
};

struct FlaringCounterexample {
    EdgePath gamma;  // first path of the orbit
    int N = 0;
    double middle = 0;   // l(beta_0)
    double ends = 0;     // max(l(beta_-R), l(beta_R))
};

struct SpecialRow {
    int N = 0;
    long long violators = 0;
    double max_violator = -1;   // -1 when none
    std::optional<double> A;    // least threshold that is not vacuous
};

struct FlaringReport {
    double mu = 0;   // nu for the special variant
    double eta = 0;
    std::optional<std::pair<int, double>> found;  // (R or N, A)
    ProbeScope scope;
    long long checked = 0;
    long long above_threshold = 0;
    long long violations = 0;   // general variant; only the first 16 are kept as counterexamples
    std::vector<SpecialRow> rows;
    std::vector<FlaringCounterexample> counterexamples;
};

FlaringReport verify_special_flaring(const TrackMap& f, double nu, int N_max, int L_probe,
                                     PathFn tag = PathFn::Lu);
FlaringReport verify_general_flaring(const TrackMap& f, const MetricConstants& c, double mu, double eta, int R,
                                     double A, PathFn tag, const ProbeScope& scope);

// M = 2 (F_{-R} + F_R) + 2C from the reduction of general to special flaring.
double slack_constant(const MetricConstants& c, double eta, int R, PathFn tag);

struct PositiveRow {
    int m = 0;
    long long Lu_sharp = 0;
    long long Lu_trunc = 0;
    double ratio_sharp = 0;
    double ratio_trunc = 0;
};

struct PositiveFlaringReport {
    bool vacuous = false;
    std::vector<PositiveRow> rows;
    double R_empirical = 0;  // running minimum of ratio_trunc over m >= 1
    bool decays = false;
    std::string note;
};

// `pieces` must concatenate to a tight path; each piece is u-legal or a
// copy of rho / rho-bar. Throws std::invalid_argument otherwise.
PositiveFlaringReport verify_positive_flaring(const TrackMap& f, const std::vector<EdgePath>& pieces, int m_max);

}  // namespace flarelab
