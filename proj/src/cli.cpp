#include "flarelab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "flarelab/coned_tree.hpp"
#include "flarelab/disintegration.hpp"
#include "flarelab/flaring_lab.hpp"
#include "flarelab/io.hpp"
#include "flarelab/suspension.hpp"

namespace flarelab {

using nlohmann::json;

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

class Table {
public:
    explicit Table(std::vector<std::string> head) : rows_{std::move(head)} {}
    void row(std::vector<std::string> r) { rows_.push_back(std::move(r)); }
    std::string str() const {
        std::vector<std::size_t> w;
        for (const auto& r : rows_)
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (w.size() <= c) w.push_back(0);
                w[c] = std::max(w[c], r[c].size());
            }
        std::ostringstream os;
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            for (std::size_t c = 0; c < rows_[k].size(); ++c) {
                os << rows_[k][c];
                if (c + 1 < rows_[k].size()) os << std::string(w[c] - rows_[k][c].size() + 2, ' ');
            }
            os << "\n";
            if (k == 0) {
                std::size_t total = 0;
                for (std::size_t c = 0; c < w.size(); ++c) total += w[c] + (c + 1 < w.size() ? 2 : 0);
                os << std::string(total, '-') << "\n";
            }
        }
        return os.str();
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

std::string labels(const MarkedGraph& g, const std::vector<Edge>& es) {
    if (es.empty()) return "(empty)";
    std::string s;
    for (std::size_t k = 0; k < es.size(); ++k) s += (k ? " " : "") + g.label(es[k]);
    return s;
}

json path_json(const MarkedGraph& g, const EdgePath& p) {
    return {{"ids", ids_json(p)}, {"labels", labels(g, p.edges)}, {"start", g.vertex_names[p.start]},
            {"end", g.vertex_names[p.end]}};
}

EdgePath read_path(const MarkedGraph& g, const std::string& text, int vertex_if_empty, const char* flag) {
    std::vector<int> ids = parse_id_list(text);
    if (ids.empty() && vertex_if_empty < 0) throw std::invalid_argument(std::string(flag) + " needs at least one edge id");
    return path_from_ids(g, ids, vertex_if_empty);
}

PathFn read_tag(const std::string& t) {
    if (t == "Lu" || t == "u") return PathFn::Lu;
    if (t == "PF" || t == "Lpf") return PathFn::Lpf;
    throw std::invalid_argument("--tag must be Lu or PF");
}

std::pair<int, int> read_levels(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--levels expects a:b");
    try {
        return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw std::invalid_argument("--levels expects integers a:b");
    }
}

Tuple read_tuple(const std::string& s) {
    Tuple t;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',' || c == ' ') {
            if (cur.empty()) continue;
            try {
                t.push_back(std::stoll(cur));
            } catch (const std::exception&) {
                throw std::invalid_argument("--tuple: bad entry \"" + cur + "\"");
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    return t;
}

json bigvec(const std::vector<BigInt>& v) {
    json a = json::array();
    for (const auto& x : v) {
        if (x >= std::numeric_limits<long long>::min() && x <= std::numeric_limits<long long>::max())
            a.push_back(static_cast<long long>(x));
        else
            a.push_back(x.str());
    }
    return a;
}

std::string tuple_str(const std::vector<BigInt>& v) {
    std::string s = "(";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k].str();
    return s + ")";
}

json rho_json(const TrackMap& f) {
    if (!f.rho()) return nullptr;
    const auto& r = *f.rho();
    return {{"path", path_json(f.graph(), r.rho)}, {"split", r.split}, {"closed", r.closed},
            {"l_alpha", r.l_alpha}, {"l_beta", r.l_beta}};
}

struct Context {
    TopRep rep;
    std::vector<std::string> warnings;
    std::unique_ptr<TrackMap> f;
};

Report begin(const std::string& command, const CliFlags& fl, Context& cx) {
    cx.rep = load_document(fl.fixture, !fl.lenient, &cx.warnings);
    Report r;
    r.doc["command"] = command;
    r.doc["fixture"] = {{"name", cx.rep.name}, {"hash", fixture_hash(cx.rep)}};
    r.doc["config"] = json::object();
    r.doc["config"]["strict"] = !fl.lenient;
    r.doc["results"] = json::object();
    r.doc["counterexamples"] = json::array();
    r.doc["warnings"] = cx.warnings;
    cx.f = std::make_unique<TrackMap>(cx.rep);
    r.table = "fixture " + cx.rep.name + "  hash " + fixture_hash(cx.rep) + "\n";
    for (const auto& w : cx.warnings) r.table += "warning: " + w + "\n";
    return r;
}

Report cmd_validate(const CliFlags& fl) {
    Context cx;
    Report r = begin("validate", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    json strata = json::array();
    Table t({"stratum", "kind", "edges", "lambda"});
    for (const auto& s : f.strata()) {
        strata.push_back({{"index", s.index}, {"kind", kind_name(s.kind)}, {"edges", labels(g, s.edges)},
                          {"lambda", s.lambda}});
        t.row({std::to_string(s.index), kind_name(s.kind), labels(g, s.edges), num(s.lambda)});
    }
    r.doc["results"] = {{"vertices", g.num_vertices()}, {"edges", g.num_edges() / 2}, {"strata", strata},
                        {"top", f.top()}, {"nielsen", rho_json(f)}, {"valid", true}};
    r.table += t.str() + "valid\n";
    return r;
}

Report cmd_spectrum(const CliFlags& fl) {
    Context cx;
    Report r = begin("spectrum", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    const int probe = fl.probe < 0 ? 8 : fl.probe;
    r.doc["config"]["probe"] = probe;
    json strata = json::array();
    Table t({"stratum", "kind", "lambda", "char poly"});
    for (const auto& s : f.strata()) {
        auto cp = characteristic_polynomial(s.transition);
        std::string cps;
        for (auto c : cp) cps += (cps.empty() ? "" : " ") + std::to_string(c);
        json js = {{"index", s.index}, {"kind", kind_name(s.kind)}, {"transition", s.transition},
                   {"lambda", s.lambda}, {"char_poly", cp}};
        if (s.kind == StratumKind::EG) js["eigenvector"] = s.eigenvector;
        if (s.kind == StratumKind::NegLinear) {
            js["twist_path"] = path_json(g, s.twist_path);
            js["twist_coefficient"] = s.twist_coefficient;
        }
        strata.push_back(js);
        t.row({std::to_string(s.index), kind_name(s.kind), num(s.lambda), cps});
    }
    json lpf = json::object();
    Table e({"edge", "l_PF", "gate"});
    for (Edge x = 0; x < g.num_edges(); ++x) {
        if (!f.in_top(x)) continue;
        if (g.is_positive(x)) lpf[g.label(x)] = f.lpf(x);
        e.row({g.label(x), num(f.lpf(x)), std::to_string(f.turns().gate[x])});
    }
    json illegal = json::array();
    for (auto [a, b] : f.turns().illegal) illegal.push_back({g.label(a), g.label(b)});
    json found = json::array();
    for (const auto& p : search_nielsen(f, probe)) found.push_back(path_json(g, p));
    r.doc["results"] = {{"strata", strata}, {"top", f.top()}, {"lambda", f.lambda()}, {"l_pf", lpf},
                        {"illegal_turns", illegal}, {"bcc1", f.bcc1()}, {"nielsen", rho_json(f)},
                        {"nielsen_search", found}};
    r.table += t.str() + "\n" + e.str() + "\nbcc(1) = " + std::to_string(f.bcc1()) + "\nNielsen paths up to length " +
               std::to_string(probe) + ": " + std::to_string(found.size()) + "\n";
    return r;
}

Report cmd_tighten(const CliFlags& fl) {
    Context cx;
    Report r = begin("tighten", fl, cx);
    const MarkedGraph& g = cx.f->graph();
    if (fl.path.empty() && fl.circuit.empty()) throw std::invalid_argument("tighten needs --path or --circuit");
    r.doc["config"]["path"] = fl.path;
    r.doc["config"]["circuit"] = fl.circuit;
    if (!fl.path.empty()) {
        std::vector<int> ids = parse_id_list(fl.path);
        if (ids.empty()) throw std::invalid_argument("--path is empty");
        std::vector<Edge> seq;
        for (int id : ids) seq.push_back(g.from_signed(id));
        EdgePath p = tighten(g, seq, g.init[seq.front()]);
        r.doc["results"]["path"] = path_json(g, p);
        r.table += "tight path: " + labels(g, p.edges) + "  (" + std::to_string(p.size()) + " edges)\n";
    }
    if (!fl.circuit.empty()) {
        std::vector<Edge> seq;
        for (int id : parse_id_list(fl.circuit)) seq.push_back(g.from_signed(id));
        Circuit c = cyclic_tighten(g, seq);
        json ids = json::array();
        for (Edge e : c.edges) ids.push_back(MarkedGraph::signed_id(e));
        r.doc["results"]["circuit"] = {{"ids", ids}, {"labels", labels(g, c.edges)}};
        r.table += "circuit: " + labels(g, c.edges) + "\n";
    }
    return r;
}

Report cmd_metrics(const CliFlags& fl) {
    Context cx;
    Report r = begin("metrics", fl, cx);
    const TrackMap& f = *cx.f;
    const int probe = fl.probe < 0 ? 8 : fl.probe;
    r.doc["config"]["probe"] = probe;
    MetricConstants c = constants(f, probe);
    json res = {{"K_quasi", c.K_quasi}, {"C_cti_u", c.C_cti_u}, {"C_cti_pf", c.C_cti_pf}, {"D_u", c.D_u},
                {"E_u", c.E_u}, {"D_pf", c.D_pf}, {"E_pf", c.E_pf}, {"probed_paths", c.probed_paths}};
    Table t({"constant", "value"});
    t.row({"K (quasicomparability)", num(c.K_quasi)});
    t.row({"C_cti (u, PF)", std::to_string(c.C_cti_u) + ", " + num(c.C_cti_pf)});
    t.row({"D_u, E_u", num(c.D_u) + ", " + num(c.E_u)});
    t.row({"D_PF, E_PF", num(c.D_pf) + ", " + num(c.E_pf)});
    t.row({"probed paths", std::to_string(c.probed_paths)});
    if (f.rep().base_vertex >= 0 && f.rep().vertex_image[f.rep().base_vertex] == f.rep().base_vertex) {
        TreeSpace T(f, fl.lower_cap);
        ConeQIConstants q = T.coneqi_constants(c);
        res["coneqi"] = {{"K", q.K}, {"C", q.C}, {"h", q.h}, {"eta_min", q.eta_min}};
        t.row({"ConeQI K, C", num(q.K) + ", " + num(q.C)});
    }
    if (!fl.path.empty()) {
        EdgePath p = read_path(f.graph(), fl.path, -1, "--path");
        r.doc["config"]["path"] = fl.path;
        LittleLengths l = little_lengths(f, p);
        BigLengths L = big_L(f, p);
        res["path"] = {{"path", path_json(f.graph(), p)}, {"tight", is_tight(p, f.graph())}, {"l_u", l.lu},
                       {"l_pf", l.lpf}, {"L_u", L.Lu}, {"L_pf", L.Lpf}, {"rho_count", rho_count(f, p)}};
        t.row({"l_u / L_u", std::to_string(l.lu) + " / " + std::to_string(L.Lu)});
        t.row({"l_PF / L_PF", num(l.lpf) + " / " + num(L.Lpf)});
    }
    r.doc["results"] = res;
    r.table += t.str();
    return r;
}

Report cmd_decompose(const CliFlags& fl) {
    Context cx;
    Report r = begin("decompose", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    EdgePath p = read_path(g, fl.path, -1, "--path");
    if (!is_tight(p, g)) throw std::invalid_argument("--path is not tight");
    r.doc["config"]["path"] = fl.path;
    json pieces = json::array();
    std::string ps;
    for (const auto& x : rho_isolation(f, p)) {
        std::string s = x.is_rho ? (x.sign > 0 ? "rho" : "~rho") : g.label(x.edge);
        pieces.push_back(s);
        ps += (ps.empty() ? "" : " | ") + s;
    }
    MuNu d = mu_nu(f, p);
    json mu = json::array();
    Table t({"term", "value", "l_u", "l_PF"});
    for (std::size_t a = 0; a < d.mu.size(); ++a) {
        LittleLengths l = little_lengths(f, d.mu[a]);
        mu.push_back(path_json(g, d.mu[a]));
        t.row({"mu_" + std::to_string(a), labels(g, d.mu[a].edges), std::to_string(l.lu), num(l.lpf)});
        if (a < d.nu.size()) t.row({"nu_" + std::to_string(a), "rho^" + std::to_string(d.nu[a]), "", ""});
    }
    BigLengths L = big_L(f, p), Lm = big_L_from_mu(f, d);
    r.doc["results"] = {{"isolation", pieces}, {"mu", mu}, {"nu", d.nu}, {"L_u", L.Lu}, {"L_pf", L.Lpf},
                        {"L_u_from_mu", Lm.Lu}, {"L_pf_from_mu", Lm.Lpf},
                        {"reconcatenates", reconcatenate(f, d) == p}};
    r.table += "isolation: " + ps + "\n" + t.str() + "L_u = " + std::to_string(L.Lu) + "  L_PF = " + num(L.Lpf) + "\n";
    return r;
}

Report cmd_cone_dist(const CliFlags& fl) {
    Context cx;
    Report r = begin("cone-dist", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    TreeSpace T(f, fl.lower_cap);
    r.doc["config"]["from"] = fl.from;
    r.doc["config"]["to"] = fl.to;
    r.doc["config"]["lower_cap"] = fl.lower_cap;
    TreePoint V = T.tree_point(read_path(g, fl.from, T.base(), "--from"));
    TreePoint W = T.tree_point(read_path(g, fl.to, T.base(), "--to"));
    Geodesic geo = T.tree_geodesic(V, W);
    ConeDistance cd = T.cone_distance(V, W);
    json route = json::array();
    std::string rs;
    for (const auto& s : cd.route) {
        route.push_back({{"via_cone", s.via_cone}, {"point", ids_json(s.point.base_path)}});
        rs += std::string(s.via_cone ? " *> " : " -> ") + "[" + labels(g, s.point.base_path.edges) + "]";
    }
    r.doc["results"] = {{"from", path_json(g, V.base_path)},
                        {"to", path_json(g, W.base_path)},
                        {"geodesic", path_json(g, geo.path)},
                        {"tree_edges", T.tree_edge_distance(V, W)},
                        {"D_u", geo.D_u},
                        {"D_pf", geo.D_pf},
                        {"nu", geo.decomposition.nu},
                        {"d_star", cd.value},
                        {"d_star_half_units", cd.d_star.half_units},
                        {"geodesic_bypass_bound", cd.geodesic_bypass_bound},
                        {"route", route},
                        {"tube_nodes", cd.tube_nodes},
                        {"truncated", cd.truncated}};
    Table t({"quantity", "value"});
    t.row({"geodesic", labels(g, geo.path.edges)});
    t.row({"T-edges", std::to_string(T.tree_edge_distance(V, W))});
    t.row({"D_u", std::to_string(geo.D_u)});
    t.row({"D_PF", num(geo.D_pf)});
    t.row({"d*", num(cd.value)});
    t.row({"bypass bound", num(cd.geodesic_bypass_bound)});
    r.table += t.str() + "route:" + rs + "\n";
    return r;
}

Report cmd_classify(const CliFlags& fl) {
    Context cx;
    Report r = begin("classify", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    TreeSpace T(f, fl.lower_cap);
    EdgePath p = read_path(g, fl.circuit, -1, "--circuit");
    if (p.start != p.end) throw std::invalid_argument("--circuit does not close up");
    r.doc["config"]["circuit"] = fl.circuit;
    r.doc["config"]["k_max"] = fl.k_max;
    ElementClass e = T.classify_element(Circuit{p.edges}, fl.k_max);
    json res = {{"kind", element_kind_name(e.kind)}, {"translation_length", e.translation_length},
                {"growth", e.growth}};
    r.table += std::string("class: ") + element_kind_name(e.kind) + "\ntranslation length on T: " +
               num(e.translation_length) + "\n";
    if (e.kind == ElementKind::Loxodromic) {
        GrowthFit fit = stable_growth_check(e);
        res["eta_hat"] = fit.eta_hat;
        res["kappa_hat"] = fit.kappa_hat;
        Table t({"k", "d*(x, D^k x)"});
        for (std::size_t k = 0; k < e.growth.size(); ++k) t.row({std::to_string(k), num(e.growth[k])});
        r.table += t.str() + "fit: eta = " + num(fit.eta_hat) + ", kappa = " + num(fit.kappa_hat) + "\n";
    }
    r.doc["results"] = res;
    return r;
}

json counterexample_json(const MarkedGraph& g, const FlaringCounterexample& c) {
    return {{"gamma", path_json(g, c.gamma)}, {"N", c.N}, {"middle", c.middle}, {"ends", c.ends}};
}

Report cmd_flare_special(const CliFlags& fl) {
    Context cx;
    Report r = begin("flare-special", fl, cx);
    const TrackMap& f = *cx.f;
    const int probe = fl.probe < 0 ? 10 : fl.probe;
    const PathFn tag = read_tag(fl.tag);
    r.doc["config"].update({{"nu", fl.nu}, {"maxN", fl.maxN}, {"probe", probe}, {"tag", path_fn_name(tag)}});
    if (!(fl.nu > 1)) throw std::invalid_argument("--nu must exceed 1");
    FlaringReport rep = verify_special_flaring(f, fl.nu, fl.maxN, probe, tag);
    json rows = json::array();
    Table t({"N", "violators", "max violator", "A"});
    for (const auto& row : rep.rows) {
        rows.push_back({{"N", row.N}, {"violators", row.violators}, {"max_violator", row.max_violator},
                        {"A", row.A ? json(*row.A) : json(nullptr)}});
        t.row({std::to_string(row.N), std::to_string(row.violators), row.max_violator < 0 ? "-" : num(row.max_violator),
               row.A ? num(*row.A) : "none"});
    }
    r.doc["results"] = {{"rows", rows}, {"checked", rep.checked}, {"above_threshold", rep.above_threshold}};
    if (rep.found) {
        r.doc["results"]["N"] = rep.found->first;
        r.doc["results"]["A"] = rep.found->second;
    }
    for (const auto& c : rep.counterexamples) r.doc["counterexamples"].push_back(counterexample_json(f.graph(), c));
    r.table += t.str();
    if (rep.found) {
        r.table += "certificate: N = " + std::to_string(rep.found->first) + ", A = " + num(rep.found->second) + "\n";
    } else {
        r.table += "no certificate for N <= " + std::to_string(fl.maxN) + "\n";
        r.exit_code = kExitFound;
    }
    return r;
}

Report cmd_flare(const CliFlags& fl) {
    Context cx;
    Report r = begin("flare", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    const int probe = fl.probe < 0 ? 8 : fl.probe;
    const PathFn tag = read_tag(fl.tag);
    if (!(fl.mu > 1)) throw std::invalid_argument("--mu must exceed 1");
    r.doc["config"].update({{"mu", fl.mu}, {"eta", fl.eta}, {"probe", probe}, {"samples", fl.samples},
                            {"seed", fl.seed}, {"tag", path_fn_name(tag)}, {"maxN", fl.maxN}});
    MetricConstants c = constants(f, std::min(probe, 8));
    int R = fl.R;
    double A = fl.A;
    json derived = json::object();
    if (R < 0 || A < 0) {
        // Special flaring with nu = 2 mu - 1 gives R = N; A absorbs the slack.
        const double nu = 2 * fl.mu - 1;
        FlaringReport sp = verify_special_flaring(f, nu, fl.maxN, probe, tag);
        derived["special_nu"] = nu;
        if (!sp.found) {
            r.doc["results"] = {{"derived", derived}, {"special_found", false}};
            for (const auto& x : sp.counterexamples) r.doc["counterexamples"].push_back(counterexample_json(g, x));
            r.table += "special flaring found no (N, A) with nu = " + num(nu) + "; no general certificate\n";
            r.exit_code = kExitFound;
            return r;
        }
        const double M = slack_constant(c, fl.eta, sp.found->first, tag);
        derived.update({{"special_N", sp.found->first}, {"special_A", sp.found->second}, {"slack_M", M}});
        if (R < 0) R = sp.found->first;
        if (A < 0) A = std::max(sp.found->second, 2 * M / (nu - 1));
    }
    ProbeScope scope{probe, fl.samples, fl.seed};
    FlaringReport rep = verify_general_flaring(f, c, fl.mu, fl.eta, R, A, tag, scope);
    r.doc["results"] = {{"derived", derived}, {"R", R},         {"A", A},
                        {"checked", rep.checked}, {"above_threshold", rep.above_threshold},
                        {"violations", rep.violations}, {"holds", rep.violations == 0}};
    for (const auto& x : rep.counterexamples) r.doc["counterexamples"].push_back(counterexample_json(g, x));
    Table t({"R", "A", "orbits", "above A", "violations"});
    t.row({std::to_string(R), num(A), std::to_string(rep.checked), std::to_string(rep.above_threshold),
           std::to_string(rep.violations)});
    r.table += t.str();
    if (!rep.counterexamples.empty()) r.exit_code = kExitFound;
    return r;
}

Report cmd_suspend(const CliFlags& fl) {
    Context cx;
    Report r = begin("suspend", fl, cx);
    const TrackMap& f = *cx.f;
    TreeSpace T(f, fl.lower_cap);
    auto [a, b] = read_levels(fl.levels);
    const int radius = fl.radius < 0 ? 6 : fl.radius;
    SectionConfig sc;
    sc.R = fl.R < 0 ? 2 : fl.R;
    sc.k2 = fl.k2;
    sc.nu2 = fl.nu;
    sc.samples = fl.samples > 0 ? static_cast<int>(fl.samples) : 200;
    sc.start_radius = std::min(radius, 3);
    sc.seed = fl.seed;
    r.doc["config"].update({{"levels", {a, b}}, {"radius", radius}, {"pairs", fl.pairs}, {"seed", fl.seed},
                            {"R", sc.R}, {"k2", sc.k2}, {"nu2", sc.nu2}, {"samples", sc.samples},
                            {"lower_cap", fl.lower_cap}});
    SuspensionWindow w = build_window(T, T.coned_ball(T.root(), radius), a, b);

    std::mt19937_64 rng(fl.seed);
    std::uniform_int_distribution<int> node(0, w.per_level() - 1), level(a, b);
    long long checked = 0, violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    json bad = json::array();
    while (checked < fl.pairs) {
        SuspensionPoint x{node(rng), level(rng)};
        auto dist = suspension_distances(T, w, x);
        for (int k = 0; k < 100 && checked < fl.pairs; ++k, ++checked) {
            SuspensionPoint y{node(rng), level(rng)};
            const double d = static_cast<double>(dist[w.id(y)]);
            const double slack = d - std::abs(x.level - y.level);
            min_slack = std::min(min_slack, slack);
            if (slack < -1e-12) {
                ++violations;
                if (bad.size() < 5) bad.push_back({{"x", {x.node, x.level}}, {"y", {y.node, y.level}}, {"d", d}});
            }
        }
    }
    Flaring2Report f2 = verify_flaring2(T, sc);
    json cx2 = json::array();
    for (const auto& c : f2.counterexamples)
        cx2.push_back({{"start1", ids_json(c.start1)}, {"start2", ids_json(c.start2)}, {"middle", c.middle},
                       {"ends", c.ends}});
    r.doc["results"] = {{"window", {{"per_level", w.per_level()}, {"levels", w.levels()}, {"escapes", w.escapes},
                                    {"vertical_edges", w.vertical_edges}, {"truncated", w.ball.truncated}}},
                        {"vertical_bound", {{"pairs", checked}, {"violations", violations}, {"min_slack", min_slack}}},
                        {"flaring2", {{"pairs", f2.pairs}, {"exact_pairs", f2.exact_pairs}, {"rejected", f2.rejected},
                                      {"max_step", f2.max_step}, {"violators", f2.violators},
                                      {"max_violator", f2.max_violator},
                                      {"A2", f2.A2 ? json(*f2.A2) : json(nullptr)}}}};
    r.doc["counterexamples"] = bad;
    for (auto& c : cx2) r.doc["counterexamples"].push_back(c);
    Table t({"check", "result"});
    t.row({"window", std::to_string(w.levels()) + " levels x " + std::to_string(w.per_level()) + " nodes, " +
                         std::to_string(w.escapes) + " escapes"});
    t.row({"vertical bound", std::to_string(violations) + " violations in " + std::to_string(checked) + " pairs"});
    t.row({"flaring 2", f2.A2 ? "A2 = " + num(*f2.A2) : "no threshold (" + std::to_string(f2.violators) + " violators)"});
    r.table += t.str();
    if (violations > 0 || !f2.A2) r.exit_code = kExitFound;
    return r;
}

Report cmd_disintegrate(const CliFlags& fl) {
    Context cx;
    Report r = begin("disintegrate", fl, cx);
    const TrackMap& f = *cx.f;
    const MarkedGraph& g = f.graph();
    Disintegration D = disintegrate(f);
    r.doc["config"]["tuple"] = fl.tuple;
    json comps = json::array();
    Table t({"component", "strata", "edges"});
    for (int s = 0; s < D.S(); ++s) {
        comps.push_back({{"strata", D.partition.components[s]}, {"edges", labels(g, D.partition.edges[s])}});
        std::string st;
        for (int i : D.partition.components[s]) st += (st.empty() ? "H" : " H") + std::to_string(i);
        t.row({"X" + std::to_string(s + 1), st, labels(g, D.partition.edges[s])});
    }
    json rel = json::array();
    for (auto [i, j] : D.partition.relation) rel.push_back({i, j});
    json triples = json::array();
    std::string ts;
    for (const auto& x : D.triples) {
        triples.push_back({{"r", x.r + 1}, {"e_i", g.label(x.e_i)}, {"e_j", g.label(x.e_j)}, {"d_i", x.d_i},
                           {"d_j", x.d_j}, {"s", x.s + 1}, {"t", x.t + 1}, {"p", x.p}});
        ts += "  (X" + std::to_string(x.r + 1) + ", " + g.label(x.e_i) + ", " + g.label(x.e_j) + ")  d = " +
              std::to_string(x.d_i) + ", " + std::to_string(x.d_j) + "\n";
    }
    Lattice L = admissible_lattice(D);
    json basis = json::array();
    std::string bs;
    for (const auto& v : L.basis) {
        basis.push_back(bigvec(v));
        bs += "  " + tuple_str(v) + "\n";
    }
    r.doc["results"] = {{"S", D.S()}, {"components", comps}, {"relation", rel}, {"triples", triples},
                        {"lattice_basis", basis}};
    r.table += t.str() + "quasi-twist triples: " + std::to_string(D.triples.size()) + "\n" + ts +
               "lattice basis (rank " + std::to_string(L.rank()) + "):\n" + bs;
    if (!fl.tuple.empty()) {
        Tuple a = read_tuple(fl.tuple);
        AdmissibilityVerdict v = is_admissible(D, a);
        json verdict = {{"tuple", a}, {"admissible", v.admissible}, {"reason", v.reason}};
        r.table += "tuple " + fl.tuple + ": " + (v.admissible ? "admissible" : "not admissible: " + v.reason) + "\n";
        if (v.admissible) {
            TopRep fa = build_f_a(D, a);
            json images = json::object();
            for (Edge e = 0; e < g.num_edges(); e += 2) images[g.label(e)] = ids_json(fa.edge_image[e]);
            CoordinateVector cv = coordinate_hom(D, a);
            json omega = json::object();
            for (std::size_t k = 0; k < cv.strata.size(); ++k) omega["H" + std::to_string(cv.strata[k])] = cv.omega[k].str();
            json exp = json::array();
            for (const auto& e : expansion_consistency(D, a))
                exp.push_back({{"stratum", e.stratum}, {"observed", e.observed}, {"expected", e.expected},
                               {"rel_error", e.rel_error}});
            verdict.update({{"f_a", images}, {"omega", omega}, {"expansion", exp}});
        } else {
            r.exit_code = kExitFound;
        }
        r.doc["results"]["verdict"] = verdict;
    }
    return r;
}

}  // namespace

Report dispatch(const std::string& command, const CliFlags& flags) {
    if (command == "validate") return cmd_validate(flags);
    if (command == "spectrum") return cmd_spectrum(flags);
    if (command == "tighten") return cmd_tighten(flags);
    if (command == "metrics") return cmd_metrics(flags);
    if (command == "decompose") return cmd_decompose(flags);
    if (command == "cone-dist") return cmd_cone_dist(flags);
    if (command == "classify") return cmd_classify(flags);
    if (command == "flare") return cmd_flare(flags);
    if (command == "flare-special") return cmd_flare_special(flags);
    if (command == "suspend") return cmd_suspend(flags);
    if (command == "disintegrate") return cmd_disintegrate(flags);
    throw std::invalid_argument("unknown command " + command);
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"flarelab: relative train track maps, flaring and coned trees"};
    app.require_subcommand(1);
    CliFlags fl;
    bool strict = false;
    auto common = [&](CLI::App* s) {
        s->add_option("fixture", fl.fixture, "fixture document (JSON, schema v1)")->required();
        s->add_flag("--strict", strict, "reject unknown keys (default)");
        s->add_flag("--lenient", fl.lenient, "warn on unknown keys");
        s->add_option("--json-out", fl.json_out, "write the JSON report here");
        s->add_option("--seed", fl.seed, "random seed");
        s->add_option("--probe", fl.probe, "probe length");
        s->add_option("--lower-cap", fl.lower_cap, "longest lower-stratum path explored per T-vertex");
    };
    struct Cmd {
        const char* name;
        const char* help;
    };
    const Cmd cmds[] = {{"validate", "parse and classify a fixture"},
                        {"spectrum", "strata, PF data, turns and Nielsen paths"},
                        {"tighten", "tighten a path (--path) or circuit (--circuit)"},
                        {"metrics", "path-length constants; lengths of --path"},
                        {"decompose", "rho isolation and mu/nu decomposition of --path"},
                        {"cone-dist", "T-geodesic and coned distance between --from and --to"},
                        {"classify", "dynamics class of --circuit on T*"},
                        {"flare", "general flaring for pseudo-orbits"},
                        {"flare-special", "special flaring certificate"},
                        {"suspend", "suspension window checks"},
                        {"disintegrate", "partition, twisting relations, admissible tuples"}};
    std::string chosen;
    for (const auto& c : cmds) {
        CLI::App* s = app.add_subcommand(c.name, c.help);
        common(s);
        const std::string n = c.name;
        if (n == "tighten" || n == "metrics" || n == "decompose") s->add_option("--path", fl.path, "signed edge ids");
        if (n == "tighten" || n == "classify") s->add_option("--circuit", fl.circuit, "signed edge ids of a loop");
        if (n == "cone-dist") {
            s->add_option("--from", fl.from, "path from the base vertex (default: empty)");
            s->add_option("--to", fl.to, "path from the base vertex")->required();
        }
        if (n == "classify") s->add_option("--kmax", fl.k_max, "largest power in the growth table");
        if (n == "flare-special" || n == "suspend") s->add_option("--nu", fl.nu, "flaring factor");
        if (n == "flare-special" || n == "flare") {
            s->add_option("--maxN", fl.maxN, "largest N tried");
            s->add_option("--tag", fl.tag, "path function: Lu or PF");
        }
        if (n == "flare") {
            s->add_option("--mu", fl.mu, "flaring factor");
            s->add_option("--eta", fl.eta, "pseudo-orbit perturbation bound");
            s->add_option("--A", fl.A, "threshold (default: derived)");
            s->add_option("--samples", fl.samples, "sampled pseudo-orbits (0: enumerate exact orbits)");
        }
        if (n == "flare" || n == "suspend") s->add_option("--R", fl.R, "orbit half-length");
        if (n == "suspend") {
            s->add_option("--radius", fl.radius, "ball radius in T-edges");
            s->add_option("--levels", fl.levels, "levels a:b");
            s->add_option("--pairs", fl.pairs, "sampled pairs for the vertical bound");
            s->add_option("--samples", fl.samples, "section pairs for flaring 2");
            s->add_option("--k2", fl.k2, "quasigeodesic constant of sections");
        }
        if (n == "disintegrate") s->add_option("--tuple", fl.tuple, "tuple a_1,...,a_S");
        s->callback([&chosen, n] { chosen = n; });
    }
    if (argc > 1 && argv[1][0] != '-' &&
        std::none_of(std::begin(cmds), std::end(cmds), [&](const Cmd& c) { return std::string(c.name) == argv[1]; })) {
        err << "error: unknown command " << argv[1] << "\n" << app.help();
        return kExitInput;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitInput;
    }
    if (strict && fl.lenient) {
        err << "error: --strict and --lenient are exclusive\n";
        return kExitInput;
    }
    try {
        Report r = dispatch(chosen, fl);
        out << r.table;
        if (!fl.json_out.empty()) {
            std::ofstream js(fl.json_out, std::ios::binary);
            if (!js) throw input_error("cannot write " + fl.json_out);
            js << r.doc.dump(2) << "\n";
        }
        return r.exit_code;
    } catch (const taxonomy_error& e) {
        err << "refused: " << e.what() << "\n";
        return kExitFound;
    } catch (const truncation_error& e) {
        err << "resource cap: " << e.what() << "\n";
        return kExitFound;
    } catch (const input_error& e) {
        err << "input error: " << e.what() << "\n";
    } catch (const structural_error& e) {
        err << "input error: " << e.what() << "\n";
    } catch (const configuration_error& e) {
        err << "configuration error: " << e.what() << "\n";
    } catch (const splitting_error& e) {
        err << "splitting error: " << e.what() << "\n";
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
    } catch (const std::out_of_range& e) {
        err << "input error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitFound;
    }
    return kExitInput;
}

}  // namespace flarelab
