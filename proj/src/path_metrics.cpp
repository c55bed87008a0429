#include "flarelab/path_metrics.hpp"

#include <algorithm>
#include <cmath>

namespace flarelab {

LittleLengths little_lengths(const TrackMap& f, const EdgePath& p) {
    LittleLengths l;
    for (Edge e : p.edges) {
        if (f.in_top(e)) ++l.lu;
        l.lpf += f.lpf(e);
    }
    return l;
}

namespace {

bool matches_at(const std::vector<Edge>& s, std::size_t i, const std::vector<Edge>& w) {
    if (w.empty() || i + w.size() > s.size()) return false;
    return std::equal(w.begin(), w.end(), s.begin() + static_cast<std::ptrdiff_t>(i));
}

}  // namespace

std::vector<Piece> rho_isolation(const TrackMap& f, const EdgePath& p) {
    std::vector<Piece> out;
    if (!f.rho()) {
        for (Edge e : p.edges) out.push_back({false, e, 1});
        return out;
    }
    const auto& rho = f.rho()->rho.edges;
    const auto rho_bar = reverse(f.graph(), f.rho()->rho).edges;
    std::size_t i = 0;
    while (i < p.size()) {
        if (matches_at(p.edges, i, rho)) {
            out.push_back({true, -1, 1});
            i += rho.size();
        } else if (matches_at(p.edges, i, rho_bar)) {
            out.push_back({true, -1, -1});
            i += rho_bar.size();
        } else {
            out.push_back({false, p.edges[i], 1});
            ++i;
        }
    }
    return out;
}

int rho_count(const TrackMap& f, const EdgePath& p) {
    int k = 0;
    for (const auto& t : rho_isolation(f, p)) k += t.is_rho;
    return k;
}

MuNu mu_nu(const TrackMap& f, const EdgePath& p) {
    const MarkedGraph& g = f.graph();
    MuNu d;
    EdgePath cur = degenerate_path(p.start);
    int run = 0;
    int at = p.start;
    for (const auto& t : rho_isolation(f, p)) {
        if (t.is_rho) {
            if (run != 0 && (run > 0) != (t.sign > 0)) {
                d.nu.push_back(run);
                run = 0;
                cur = degenerate_path(at);
            }
            if (run == 0) d.mu.push_back(cur);
            run += t.sign;
            at = t.sign > 0 ? f.rho()->rho.end : f.rho()->rho.start;
            continue;
        }
        if (run != 0) {
            d.nu.push_back(run);
            run = 0;
            cur = degenerate_path(at);
        }
        cur.edges.push_back(t.edge);
        cur.end = at = g.term[t.edge];
    }
    if (run != 0) {
        d.nu.push_back(run);
        cur = degenerate_path(at);
    }
    d.mu.push_back(cur);
    return d;
}

EdgePath reconcatenate(const TrackMap& f, const MuNu& d) {
    EdgePath out = d.mu.front();
    for (std::size_t a = 0; a < d.nu.size(); ++a) {
        EdgePath r = d.nu[a] > 0 ? f.rho()->rho : reverse(f.graph(), f.rho()->rho);
        for (int k = 0; k < std::abs(d.nu[a]); ++k) out = concat(out, r);
        out = concat(out, d.mu[a + 1]);
    }
    return out;
}

BigLengths big_L(const TrackMap& f, const EdgePath& p) {
    LittleLengths l = little_lengths(f, p);
    BigLengths b{l.lu, l.lpf};
    if (!f.rho()) return b;
    const int k = rho_count(f, p);
    LittleLengths r = little_lengths(f, f.rho()->rho);
    b.Lu -= k * r.lu;
    b.Lpf -= k * r.lpf;
    return b;
}

BigLengths big_L_from_mu(const TrackMap& f, const MuNu& d) {
    BigLengths b;
    for (const auto& m : d.mu) {
        LittleLengths l = little_lengths(f, m);
        b.Lu += l.lu;
        b.Lpf += l.lpf;
    }
    return b;
}

MetricConstants constants(const TrackMap& f, int probe_length) {
    MetricConstants c;
    const MarkedGraph& g = f.graph();
    for (Edge e = 0; e < g.num_edges(); ++e)
        if (f.in_top(e) && f.lpf(e) > 0) c.K_quasi = std::max({c.K_quasi, f.lpf(e), 1.0 / f.lpf(e)});
    if (f.rho()) {
        LittleLengths r = little_lengths(f, f.rho()->rho);
        c.C_cti_u = 2 * r.lu;
        c.C_cti_pf = 2 * r.lpf;
    }
    c.probe_length = probe_length;
    double ru = 1, rpf = 1;
    struct Sample {
        double a, b;
    };
    std::vector<Sample> su, spf;
    for_each_tight_path(g, probe_length, true, [&](const EdgePath& p) {
        ++c.probed_paths;
        BigLengths x = big_L(f, p);
        BigLengths y = big_L(f, apply_map(f.rep(), p, 1));
        const double xu = static_cast<double>(x.Lu), yu = static_cast<double>(y.Lu);
        if (xu > 0) ru = std::max(ru, yu / xu);
        if (yu > 0) ru = std::max(ru, xu / yu);
        if (x.Lpf > 1e-12) rpf = std::max(rpf, y.Lpf / x.Lpf);
        if (y.Lpf > 1e-12) rpf = std::max(rpf, x.Lpf / y.Lpf);
        su.push_back({xu, yu});
        spf.push_back({x.Lpf, y.Lpf});
    });
    // D must exceed 1; the nudge keeps it strictly above when every ratio is 1.
    c.D_u = std::max(ru, 1.0 + 1e-9);
    c.D_pf = std::max(rpf, 1.0 + 1e-9);
    for (const auto& s : su) c.E_u = std::max({c.E_u, s.b - c.D_u * s.a, s.a - c.D_u * s.b});
    for (const auto& s : spf) c.E_pf = std::max({c.E_pf, s.b - c.D_pf * s.a, s.a - c.D_pf * s.b});
    return c;
}

CtiVerdict cti_check(const TrackMap& f, const MetricConstants& c, const EdgePath& gamma, const EdgePath& delta) {
    if (gamma.end != delta.start) throw structural_error("cti_check: paths are not composable");
    BigLengths a = big_L(f, gamma), b = big_L(f, delta);
    BigLengths j = big_L(f, join(f.graph(), gamma, delta));
    CtiVerdict v;
    v.holds_u = j.Lu <= a.Lu + b.Lu + c.C_cti_u;
    const double rhs = a.Lpf + b.Lpf + c.C_cti_pf;
    v.holds_pf = j.Lpf <= rhs + 1e-9 * std::max(1.0, rhs);
    return v;
}

}  // namespace flarelab
