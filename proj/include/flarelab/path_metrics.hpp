#pragma once

#include <vector>

#include "flarelab/rtt_map.hpp"

namespace flarelab {

struct LittleLengths {
    long long lu = 0;
    double lpf = 0;
};

struct BigLengths {
    long long Lu = 0;
    double Lpf = 0;
};

LittleLengths little_lengths(const TrackMap& f, const EdgePath& p);

// Single edges and whole copies of rho / rho-bar, left to right.
std::vector<Piece> rho_isolation(const TrackMap& f, const EdgePath& p);
// Number of rho terms in the isolation.
int rho_count(const TrackMap& f, const EdgePath& p);

// mu[0], nu[0], mu[1], ..., nu[A-1], mu[A]. nu[a] is the signed exponent of
// a maximal run of rho (positive) or rho-bar (negative).
struct MuNu {
    std::vector<EdgePath> mu;
    std::vector<int> nu;
    std::size_t A() const { return nu.size(); }
};
MuNu mu_nu(const TrackMap& f, const EdgePath& p);
EdgePath reconcatenate(const TrackMap& f, const MuNu& d);

BigLengths big_L(const TrackMap& f, const EdgePath& p);
// Sum of little lengths over the mu terms; equals big_L.
BigLengths big_L_from_mu(const TrackMap& f, const MuNu& d);

struct MetricConstants {
    double K_quasi = 1;
    long long C_cti_u = 0;
    double C_cti_pf = 0;
    // L(f_# g) <= D L(g) + E and L(g) <= D L(f_# g) + E, on probed paths.
    double D_u = 1, E_u = 0;
    double D_pf = 1, E_pf = 0;
    int probe_length = 0;
    long long probed_paths = 0;
};
MetricConstants constants(const TrackMap& f, int probe_length = 12);

struct CtiVerdict {
    bool holds_u = true;
    bool holds_pf = true;
    bool holds() const { return holds_u && holds_pf; }
};
// gamma and delta must be composable tight paths.
CtiVerdict cti_check(const TrackMap& f, const MetricConstants& c, const EdgePath& gamma, const EdgePath& delta);

}  // namespace flarelab
