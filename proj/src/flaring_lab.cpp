#include "flarelab/flaring_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace flarelab {

const char* path_fn_name(PathFn t) { return t == PathFn::Lu ? "L_u" : "L_PF"; }

double path_length(const TrackMap& f, const EdgePath& p, PathFn tag) {
    BigLengths b = big_L(f, p);
    return tag == PathFn::Lu ? static_cast<double>(b.Lu) : b.Lpf;
}

namespace {

constexpr double kTol = 1e-9;

bool shorter(const EdgePath& a, const EdgePath& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.edges < b.edges;
}

}  // namespace

PerturbationSet perturbation_set(const TrackMap& f, const MetricConstants& c, double eta, PathFn tag,
                                 std::size_t cap) {
    PerturbationSet P;
    P.eta = eta;
    P.tag = tag;
    const double lu_rho = f.rho() ? static_cast<double>(little_lengths(f, f.rho()->rho).lu) : 0.0;
    P.radius = static_cast<int>(std::floor(eta * c.K_quasi + lu_rho + 2));
    const int nv = f.graph().num_vertices();
    P.by_end.assign(nv, {});
    P.by_start.assign(nv, {});
    for_each_tight_path(f.graph(), P.radius, true, [&](const EdgePath& p) {
        if (path_length(f, p, tag) > eta + kTol) return;
        if (++P.size > cap) throw std::runtime_error("perturbation set exceeds its cap");
        P.by_end[p.end].push_back(p);
        P.by_start[p.start].push_back(p);
    });
    for (auto& v : P.by_end) std::sort(v.begin(), v.end(), shorter);
    for (auto& v : P.by_start) std::sort(v.begin(), v.end(), shorter);
    return P;
}

std::optional<CoarseSimWitness> coarse_sim(const TrackMap& f, const PerturbationSet& P, const EdgePath& beta,
                                           const EdgePath& gamma) {
    const MarkedGraph& g = f.graph();
    if (beta == gamma) return CoarseSimWitness{degenerate_path(beta.start), degenerate_path(beta.end)};
    const EdgePath beta_bar = reverse(g, beta);
    for (const EdgePath& alpha : P.by_end[beta.start]) {
        if (alpha.start != gamma.start) continue;
        EdgePath omega = join(g, beta_bar, join(g, reverse(g, alpha), gamma));
        if (static_cast<int>(omega.size()) > P.radius) continue;
        if (path_length(f, omega, P.tag) > P.eta + kTol) continue;
        return CoarseSimWitness{alpha, omega};
    }
    return std::nullopt;
}

PseudoOrbit exact_orbit(const TrackMap& f, const EdgePath& gamma, int R, PathFn tag) {
    PseudoOrbit o;
    o.R = R;
    o.tag = tag;
    o.beta.push_back(gamma);
    for (int k = 0; k < 2 * R; ++k) {
        EdgePath next = apply_map(f.rep(), o.beta.back(), 1);
        o.witnesses.push_back({degenerate_path(next.start), degenerate_path(next.end)});
        o.beta.push_back(std::move(next));
    }
    return o;
}

std::vector<PseudoOrbit> sample_pseudo_orbits(const TrackMap& f, const PerturbationSet& P, int R, int count,
                                              std::uint64_t seed, int max_start_length) {
    std::mt19937_64 rng(seed);
    const MarkedGraph& g = f.graph();
    std::vector<PseudoOrbit> out;
    for (int i = 0; i < count; ++i) {
        int len = std::uniform_int_distribution<int>(1, std::max(1, max_start_length))(rng);
        EdgePath gamma = random_tight_path(g, len, rng);
        if (P.eta == 0) {
            out.push_back(exact_orbit(f, gamma, R, P.tag));
            out.back().eta = 0;
            continue;
        }
        PseudoOrbit o;
        o.R = R;
        o.eta = P.eta;
        o.tag = P.tag;
        o.beta.push_back(gamma);
        for (int k = 0; k < 2 * R; ++k) {
            EdgePath fb = apply_map(f.rep(), o.beta.back(), 1);
            const auto& as = P.by_end[fb.start];
            const auto& ws = P.by_start[fb.end];
            const EdgePath& alpha = as[std::uniform_int_distribution<std::size_t>(0, as.size() - 1)(rng)];
            const EdgePath& omega = ws[std::uniform_int_distribution<std::size_t>(0, ws.size() - 1)(rng)];
            o.witnesses.push_back({alpha, omega});
            o.beta.push_back(join(g, join(g, alpha, fb), omega));
        }
        out.push_back(std::move(o));
    }
    return out;
}

bool validate_orbit(const TrackMap& f, const PerturbationSet& P, const PseudoOrbit& o) {
    for (std::size_t k = 0; k + 1 < o.beta.size(); ++k) {
        EdgePath fb = apply_map(f.rep(), o.beta[k], 1);
        if (!coarse_sim(f, P, fb, o.beta[k + 1])) return false;
    }
    return true;
}

FlaringReport verify_special_flaring(const TrackMap& f, double nu, int N_max, int L_probe, PathFn tag) {
    FlaringReport rep;
    rep.mu = nu;
    rep.scope.max_length = L_probe;
    std::vector<EdgePath> probe;
    for_each_tight_path(f.graph(), L_probe, false, [&](const EdgePath& p) { probe.push_back(p); });
    for (int N = 1; N <= N_max; ++N) {
        SpecialRow row;
        row.N = N;
        std::vector<double> values;
        values.reserve(probe.size());
        std::vector<FlaringCounterexample> viol;
        for (const EdgePath& gamma : probe) {
            EdgePath mid = apply_map(f.rep(), gamma, N);
            EdgePath far = apply_map(f.rep(), mid, N);
            const double x = path_length(f, mid, tag);
            const double y = std::max(path_length(f, gamma, tag), path_length(f, far, tag));
            values.push_back(x);
            ++rep.checked;
            if (nu * x > y + kTol) {
                ++row.violators;
                row.max_violator = std::max(row.max_violator, x);
                viol.push_back({gamma, N, x, y});
            }
        }
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        if (row.violators == 0) {
            row.A = 0.0;
        } else {
            auto it = std::upper_bound(values.begin(), values.end(), row.max_violator);
            if (it != values.end()) row.A = *it;
        }
        rep.rows.push_back(row);
        if (row.A) {
            rep.found = std::make_pair(N, *row.A);
            break;
        }
        std::sort(viol.begin(), viol.end(), [](const auto& a, const auto& b) {
            if (a.middle != b.middle) return a.middle > b.middle;
            return a.gamma.edges < b.gamma.edges;
        });
        for (std::size_t k = 0; k < viol.size() && k < 3; ++k) rep.counterexamples.push_back(viol[k]);
    }
    if (rep.found) {
        const int N = rep.found->first;
        const double A = rep.found->second;
        rep.above_threshold = 0;
        for (const EdgePath& gamma : probe)
            if (path_length(f, apply_map(f.rep(), gamma, N), tag) >= A) ++rep.above_threshold;
        rep.counterexamples.clear();
    }
    return rep;
}

FlaringReport verify_general_flaring(const TrackMap& f, const MetricConstants& c, double mu, double eta, int R,
                                     double A, PathFn tag, const ProbeScope& scope) {
    FlaringReport rep;
    rep.mu = mu;
    rep.eta = eta;
    rep.scope = scope;
    auto check = [&](const PseudoOrbit& o) {
        ++rep.checked;
        const double l0 = path_length(f, o.at(0), tag);
        if (l0 < A) return;
        ++rep.above_threshold;
        const double ends = std::max(path_length(f, o.at(-R), tag), path_length(f, o.at(R), tag));
        if (mu * l0 <= ends + kTol) return;
        ++rep.violations;
        if (rep.counterexamples.size() < 16) rep.counterexamples.push_back({o.at(-R), R, l0, ends});
    };
    if (eta == 0 && scope.sample_count == 0) {
        for_each_tight_path(f.graph(), scope.max_length, false,
                            [&](const EdgePath& p) { check(exact_orbit(f, p, R, tag)); });
    } else {
        PerturbationSet P = perturbation_set(f, c, eta, tag);
        for (const auto& o : sample_pseudo_orbits(f, P, R, static_cast<int>(scope.sample_count), scope.seed,
                                                  scope.max_length))
            check(o);
    }
    if (rep.counterexamples.empty()) rep.found = std::make_pair(R, A);
    return rep;
}

double slack_constant(const MetricConstants& c, double eta, int R, PathFn tag) {
    const double C = tag == PathFn::Lu ? static_cast<double>(c.C_cti_u) : c.C_cti_pf;
    const double D = tag == PathFn::Lu ? c.D_u : c.D_pf;
    const double E = tag == PathFn::Lu ? c.E_u : c.E_pf;
    double fwd = 0, bwd = 0;
    for (int r = 1; r <= R; ++r) fwd = eta + D * fwd + E + C;
    for (int r = 1; r <= R; ++r) bwd = D * (eta + bwd + C) + E;
    return 2 * (fwd + bwd) + 2 * C;
}

PositiveFlaringReport verify_positive_flaring(const TrackMap& f, const std::vector<EdgePath>& pieces, int m_max) {
    const MarkedGraph& g = f.graph();
    if (pieces.empty()) throw std::invalid_argument("empty splitting");
    EdgePath alpha = pieces.front();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const EdgePath& p = pieces[k];
        bool is_rho = f.rho() && (p == f.rho()->rho || p == reverse(g, f.rho()->rho));
        if (!is_rho && !is_u_legal(f, p))
            throw std::invalid_argument("splitting term " + std::to_string(k) + " is neither u-legal nor a copy of rho");
        if (k > 0) alpha = concat(alpha, p);
    }
    if (!is_tight(alpha, g)) throw std::invalid_argument("splitting does not concatenate to a tight path");
    PositiveFlaringReport rep;
    const long long L0 = big_L(f, alpha).Lu;
    if (L0 == 0) {
        rep.vacuous = true;
        rep.note = "L_u(alpha) = 0";
        return rep;
    }
    rep.R_empirical = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= m_max; ++m) {
        PositiveRow row;
        row.m = m;
        EdgePath sharp = apply_map(f.rep(), alpha, m);
        EdgePath trunc = m == 0 ? alpha : apply_map_trunc(f.rep(), alpha, m, bcc(f.rep(), m));
        row.Lu_sharp = big_L(f, sharp).Lu;
        row.Lu_trunc = big_L(f, trunc).Lu;
        const double scale = std::pow(f.lambda(), m / 2.0) * static_cast<double>(L0);
        row.ratio_sharp = static_cast<double>(row.Lu_sharp) / scale;
        row.ratio_trunc = static_cast<double>(row.Lu_trunc) / scale;
        if (m >= 1) rep.R_empirical = std::min(rep.R_empirical, row.ratio_trunc);
        rep.rows.push_back(row);
    }
    if (m_max < 1) rep.R_empirical = 1;
    // Decay evidence: the truncated ratio falls at every step and ends far
    // below its first value.
    if (rep.rows.size() >= 4) {
        bool falling = true;
        for (std::size_t k = 2; k < rep.rows.size(); ++k)
            falling = falling && rep.rows[k].ratio_trunc < rep.rows[k - 1].ratio_trunc;
        rep.decays = falling && rep.rows.back().ratio_trunc < 0.1 * rep.rows[1].ratio_trunc;
    }
    return rep;
}

}  // namespace flarelab
