#include "flarelab/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace flarelab {

using nlohmann::json;

namespace {

struct Reader {
    bool strict;
    std::vector<std::string>* warnings;

    [[noreturn]] void fail(const std::string& where, const std::string& what) const {
        throw input_error(where + ": " + what);
    }

    void keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(where, "expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (ok.count(it.key())) continue;
            std::string msg = where + ": unknown key \"" + it.key() + "\"";
            if (strict) throw input_error(msg);
            if (warnings) warnings->push_back(msg);
        }
    }

    const json& need(const json& obj, const std::string& where, const char* key) const {
        auto it = obj.find(key);
        if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
        return *it;
    }

    int integer(const json& v, const std::string& where) const {
        if (!v.is_number_integer()) fail(where, "expected an integer");
        return v.get<int>();
    }

    std::string string(const json& v, const std::string& where) const {
        if (!v.is_string()) fail(where, "expected a string");
        return v.get<std::string>();
    }

    std::vector<int> ids(const json& v, const std::string& where) const {
        if (!v.is_array()) fail(where, "expected an array of signed edge ids");
        std::vector<int> out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back(integer(v[k], where + "/" + std::to_string(k)));
        return out;
    }
};

EdgePath read_path(const Reader& r, const MarkedGraph& g, const json& v, const std::string& where,
                   int vertex_if_empty) {
    std::vector<int> raw = r.ids(v, where);
    try {
        return path_from_ids(g, raw, vertex_if_empty);
    } catch (const structural_error& e) {
        r.fail(where, e.what());
    }
}

SplitTerm::Kind read_kind(const Reader& r, const json& v, const std::string& where) {
    std::string k = r.string(v, where);
    if (k == "edge") return SplitTerm::Kind::Edge;
    if (k == "nielsen") return SplitTerm::Kind::Nielsen;
    if (k == "exceptional") return SplitTerm::Kind::Exceptional;
    if (k == "zero") return SplitTerm::Kind::Zero;
    r.fail(where, "unknown term kind \"" + k + "\"");
}

std::vector<SplitTerm> read_terms(const Reader& r, const MarkedGraph& g, const json& v, const std::string& where) {
    if (!v.is_array()) r.fail(where, "expected an array of terms");
    std::vector<SplitTerm> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string w = where + "/" + std::to_string(k);
        r.keys(v[k], w, {"kind", "path"});
        SplitTerm t;
        t.kind = read_kind(r, r.need(v[k], w, "kind"), w + "/kind");
        t.path = read_path(r, g, r.need(v[k], w, "path"), w + "/path", -1);
        if (t.path.empty()) r.fail(w + "/path", "term path is empty");
        out.push_back(std::move(t));
    }
    return out;
}

json terms_json(const std::vector<SplitTerm>& terms) {
    json arr = json::array();
    for (const auto& t : terms) arr.push_back({{"kind", term_kind_name(t.kind)}, {"path", ids_json(t.path)}});
    return arr;
}

}  // namespace

json ids_json(const EdgePath& p) {
    json arr = json::array();
    for (int id : path_ids(p)) arr.push_back(id);
    return arr;
}

std::vector<int> parse_id_list(const std::string& s) {
    std::vector<int> out;
    std::string tok;
    auto flush = [&]() {
        if (tok.empty()) return;
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw input_error("bad integer \"" + tok + "\"");
        out.push_back(v);
        tok.clear();
    };
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t')
            flush();
        else
            tok.push_back(c);
    }
    flush();
    return out;
}

TopRep parse_document(const std::string& text, bool strict, std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(std::string("syntax: ") + e.what());
    }
    Reader r{strict, warnings};
    r.keys(doc, "", {"version", "meta", "graph", "map", "nielsen", "splittings", "taken_paths"});
    if (r.integer(r.need(doc, "", "version"), "/version") != kSchemaVersion)
        r.fail("/version", "unsupported schema version");

    const json& gj = r.need(doc, "", "graph");
    r.keys(gj, "/graph", {"vertices", "edges"});
    const json& vj = r.need(gj, "/graph", "vertices");
    if (!vj.is_array() || vj.empty()) r.fail("/graph/vertices", "expected a nonempty array of names");
    std::vector<std::string> vnames;
    std::map<std::string, int> vindex;
    for (std::size_t k = 0; k < vj.size(); ++k) {
        std::string n = r.string(vj[k], "/graph/vertices/" + std::to_string(k));
        if (vindex.count(n)) r.fail("/graph/vertices/" + std::to_string(k), "duplicate vertex \"" + n + "\"");
        vindex[n] = static_cast<int>(vnames.size());
        vnames.push_back(n);
    }
    auto vertex = [&](const json& v, const std::string& where) {
        std::string n = r.string(v, where);
        auto it = vindex.find(n);
        if (it == vindex.end()) r.fail(where, "unknown vertex \"" + n + "\"");
        return it->second;
    };

    const json& ej = r.need(gj, "/graph", "edges");
    if (!ej.is_array() || ej.empty()) r.fail("/graph/edges", "expected a nonempty array");
    const int ne = static_cast<int>(ej.size());
    std::vector<EdgeSpec> specs(ne);
    std::vector<bool> seen(ne, false);
    std::set<std::string> enames;
    for (int k = 0; k < ne; ++k) {
        const std::string w = "/graph/edges/" + std::to_string(k);
        r.keys(ej[k], w, {"id", "name", "reverse", "init", "term", "stratum"});
        int id = r.integer(r.need(ej[k], w, "id"), w + "/id");
        if (id < 1 || id > ne) r.fail(w + "/id", "edge ids must be 1.." + std::to_string(ne));
        if (seen[id - 1]) r.fail(w + "/id", "duplicate edge id " + std::to_string(id));
        seen[id - 1] = true;
        EdgeSpec s;
        s.name = r.string(r.need(ej[k], w, "name"), w + "/name");
        if (!enames.insert(s.name).second) r.fail(w + "/name", "duplicate edge name \"" + s.name + "\"");
        if (!ej[k].contains("reverse")) r.fail(w, "edge " + s.name + " lacks a reverse partner");
        int rev = r.integer(ej[k]["reverse"], w + "/reverse");
        if (rev != -id) r.fail(w + "/reverse", "edge " + s.name + " has reverse " + std::to_string(rev) +
                                                   ", expected " + std::to_string(-id));
        s.init = vertex(r.need(ej[k], w, "init"), w + "/init");
        s.term = vertex(r.need(ej[k], w, "term"), w + "/term");
        s.stratum = r.integer(r.need(ej[k], w, "stratum"), w + "/stratum");
        specs[id - 1] = s;
    }
    MarkedGraph g = MarkedGraph::build(vnames, specs);

    const json& mj = r.need(doc, "", "map");
    r.keys(mj, "/map", {"vertex_image", "edge_image"});
    const json& vij = r.need(mj, "/map", "vertex_image");
    if (!vij.is_object()) r.fail("/map/vertex_image", "expected an object");
    std::vector<int> vimage(vnames.size(), -1);
    for (auto it = vij.begin(); it != vij.end(); ++it) {
        const std::string w = "/map/vertex_image/" + it.key();
        auto src = vindex.find(it.key());
        if (src == vindex.end()) r.fail(w, "unknown vertex");
        vimage[src->second] = vertex(it.value(), w);
    }
    for (std::size_t v = 0; v < vimage.size(); ++v)
        if (vimage[v] < 0) r.fail("/map/vertex_image", "vertex \"" + vnames[v] + "\" has no image");

    const json& eij = r.need(mj, "/map", "edge_image");
    if (!eij.is_array()) r.fail("/map/edge_image", "expected an array");
    std::vector<EdgePath> images(ne);
    std::vector<bool> have(ne, false);
    for (std::size_t k = 0; k < eij.size(); ++k) {
        const std::string w = "/map/edge_image/" + std::to_string(k);
        r.keys(eij[k], w, {"edge", "image"});
        int id = r.integer(r.need(eij[k], w, "edge"), w + "/edge");
        if (id < 1 || id > ne) r.fail(w + "/edge", "images are given for positive edge ids 1.." + std::to_string(ne));
        if (have[id - 1]) r.fail(w + "/edge", "duplicate image for edge " + std::to_string(id));
        have[id - 1] = true;
        images[id - 1] = read_path(r, g, r.need(eij[k], w, "image"), w + "/image", vimage[specs[id - 1].init]);
    }
    for (int k = 0; k < ne; ++k)
        if (!have[k]) r.fail("/map/edge_image", "edge " + specs[k].name + " has no image");
    TopRep f = TopRep::build(g, vimage, images);

    if (doc.contains("meta")) {
        const json& meta = doc["meta"];
        r.keys(meta, "/meta", {"name", "base_vertex", "ct_declared"});
        if (meta.contains("name")) f.name = r.string(meta["name"], "/meta/name");
        if (meta.contains("base_vertex")) f.base_vertex = vertex(meta["base_vertex"], "/meta/base_vertex");
        if (meta.contains("ct_declared")) {
            if (!meta["ct_declared"].is_boolean()) r.fail("/meta/ct_declared", "expected a boolean");
            f.ct_declared = meta["ct_declared"].get<bool>();
        }
    }
    if (doc.contains("nielsen")) {
        const json& nj = doc["nielsen"];
        r.keys(nj, "/nielsen", {"path", "split"});
        DeclaredNielsen n;
        n.path = read_path(r, g, r.need(nj, "/nielsen", "path"), "/nielsen/path", -1);
        if (n.path.empty()) r.fail("/nielsen/path", "Nielsen path is empty");
        if (nj.contains("split")) {
            int s = r.integer(nj["split"], "/nielsen/split");
            if (s <= 0 || s >= static_cast<int>(n.path.size())) r.fail("/nielsen/split", "split index out of range");
            n.split = static_cast<std::size_t>(s);
        }
        f.nielsen = n;
    }
    if (doc.contains("splittings")) {
        const json& sj = doc["splittings"];
        if (!sj.is_array()) r.fail("/splittings", "expected an array");
        for (std::size_t k = 0; k < sj.size(); ++k) {
            const std::string w = "/splittings/" + std::to_string(k);
            r.keys(sj[k], w, {"edge", "terms"});
            int id = r.integer(r.need(sj[k], w, "edge"), w + "/edge");
            if (id < 1 || id > ne) r.fail(w + "/edge", "splittings are keyed by positive edge ids");
            Edge e = g.from_signed(id);
            if (f.splittings.count(e)) r.fail(w + "/edge", "duplicate splitting for edge " + std::to_string(id));
            f.splittings[e] = read_terms(r, g, r.need(sj[k], w, "terms"), w + "/terms");
        }
    }
    if (doc.contains("taken_paths")) {
        const json& tj = doc["taken_paths"];
        if (!tj.is_array()) r.fail("/taken_paths", "expected an array");
        for (std::size_t k = 0; k < tj.size(); ++k) {
            const std::string w = "/taken_paths/" + std::to_string(k);
            r.keys(tj[k], w, {"path", "terms"});
            TakenPath t;
            t.path = read_path(r, g, r.need(tj[k], w, "path"), w + "/path", -1);
            if (t.path.empty()) r.fail(w + "/path", "taken path is empty");
            t.image_terms = read_terms(r, g, r.need(tj[k], w, "terms"), w + "/terms");
            f.taken_paths.push_back(std::move(t));
        }
    }

    auto violations = validate_toprep(f);
    if (!violations.empty()) {
        std::string msg = "invalid document:";
        for (const auto& v : violations) msg += " [" + v.code + "] " + v.message + ";";
        throw input_error(msg);
    }
    return f;
}

TopRep load_document(const std::string& path, bool strict, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str(), strict, warnings);
}

json serialize(const TopRep& f) {
    const MarkedGraph& g = f.graph;
    json doc;
    doc["version"] = kSchemaVersion;
    json meta = json::object();
    if (!f.name.empty()) meta["name"] = f.name;
    if (f.base_vertex >= 0) meta["base_vertex"] = g.vertex_names[f.base_vertex];
    meta["ct_declared"] = f.ct_declared;
    doc["meta"] = meta;
    json edges = json::array();
    for (Edge e = 0; e < g.num_edges(); e += 2) {
        int id = MarkedGraph::signed_id(e);
        edges.push_back({{"id", id},
                         {"name", g.names[e]},
                         {"reverse", -id},
                         {"init", g.vertex_names[g.init[e]]},
                         {"term", g.vertex_names[g.term[e]]},
                         {"stratum", g.stratum[e]}});
    }
    doc["graph"] = {{"vertices", g.vertex_names}, {"edges", edges}};
    json vimg = json::object();
    for (int v = 0; v < g.num_vertices(); ++v) vimg[g.vertex_names[v]] = g.vertex_names[f.vertex_image[v]];
    json eimg = json::array();
    for (Edge e = 0; e < g.num_edges(); e += 2)
        eimg.push_back({{"edge", MarkedGraph::signed_id(e)}, {"image", ids_json(f.edge_image[e])}});
    doc["map"] = {{"vertex_image", vimg}, {"edge_image", eimg}};
    if (f.nielsen) {
        json n = {{"path", ids_json(f.nielsen->path)}};
        if (f.nielsen->split) n["split"] = *f.nielsen->split;
        doc["nielsen"] = n;
    }
    if (!f.splittings.empty()) {
        json s = json::array();
        for (const auto& [e, terms] : f.splittings)
            s.push_back({{"edge", MarkedGraph::signed_id(e)}, {"terms", terms_json(terms)}});
        doc["splittings"] = s;
    }
    if (!f.taken_paths.empty()) {
        json t = json::array();
        for (const auto& tp : f.taken_paths) t.push_back({{"path", ids_json(tp.path)}, {"terms", terms_json(tp.image_terms)}});
        doc["taken_paths"] = t;
    }
    return doc;
}

std::string canonical_text(const TopRep& f) { return serialize(f).dump(); }

std::string fixture_hash(const TopRep& f) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_text(f)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace flarelab
