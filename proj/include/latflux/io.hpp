#ifndef LATFLUX_IO_HPP
#define LATFLUX_IO_HPP

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "additive.hpp"
#include "context.hpp"
#include "dimdraw.hpp"
#include "forces.hpp"
#include "lattice.hpp"
#include "layout.hpp"
#include "pipeline.hpp"

namespace latflux {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Burmeister .cxt

namespace detail {

inline std::string chomp(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

inline std::size_t parse_count(const std::string& line, const char* what) {
    std::size_t pos = 0;
    long long v = -1;
    try {
        v = std::stoll(line, &pos);
    } catch (const std::exception&) {
        throw InputError(std::string("cxt: expected ") + what + ", got '" + line + "'");
    }
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos != line.size() || v < 0) throw InputError(std::string("cxt: bad ") + what + " '" + line + "'");
    return static_cast<std::size_t>(v);
}

} // namespace detail

/// Accepts 'x' or 'X' for a cross, '.' for none, LF or CRLF line ends, and
/// the optional blank line many writers put after the two counts.
inline FormalContext read_cxt(std::istream& in) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(detail::chomp(line));
    std::size_t at = 0;
    if (lines.empty() || lines[0] != "B") throw InputError("cxt: missing 'B' header");
    ++at;
    while (at < lines.size() && lines[at].empty()) ++at;
    if (at + 2 > lines.size()) throw InputError("cxt: missing object/attribute counts");
    const std::size_t g = detail::parse_count(lines[at++], "object count");
    const std::size_t m = detail::parse_count(lines[at++], "attribute count");
    const std::size_t need = 2 * g + m;
    if (lines.size() - at > need && lines[at].empty()) ++at;
    if (lines.size() - at < need)
        throw InputError("cxt: expected " + std::to_string(need) + " lines after the counts, got " +
                         std::to_string(lines.size() - at));
    for (std::size_t i = at + need; i < lines.size(); ++i)
        if (!lines[i].empty()) throw InputError("cxt: unexpected trailing line '" + lines[i] + "'");
    std::vector<std::string> objects(lines.begin() + static_cast<std::ptrdiff_t>(at),
                                     lines.begin() + static_cast<std::ptrdiff_t>(at + g));
    at += g;
    std::vector<std::string> attributes(lines.begin() + static_cast<std::ptrdiff_t>(at),
                                        lines.begin() + static_cast<std::ptrdiff_t>(at + m));
    at += m;
    std::vector<std::vector<bool>> rows(g, std::vector<bool>(m));
    for (std::size_t i = 0; i < g; ++i) {
        const std::string& row = lines[at + i];
        if (row.size() != m)
            throw InputError("cxt: row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                             " entries, expected " + std::to_string(m));
        for (std::size_t j = 0; j < m; ++j) {
            const char c = row[j];
            if (c == 'x' || c == 'X') rows[i][j] = true;
            else if (c != '.') throw InputError(std::string("cxt: unexpected character '") + c + "' in row " +
                                                std::to_string(i + 1));
        }
    }
    return FormalContext(std::move(objects), std::move(attributes), rows);
}

inline FormalContext read_cxt_string(const std::string& text) {
    std::istringstream in(text);
    return read_cxt(in);
}

inline void write_cxt(std::ostream& out, const FormalContext& ctx) {
    out << "B\n\n" << ctx.object_count() << '\n' << ctx.attribute_count() << '\n';
    for (const auto& g : ctx.objects()) out << g << '\n';
    for (const auto& m : ctx.attributes()) out << m << '\n';
    for (std::size_t g = 0; g < ctx.object_count(); ++g) {
        for (std::size_t m = 0; m < ctx.attribute_count(); ++m) out << (ctx.incident(g, m) ? 'X' : '.');
        out << '\n';
    }
}

inline std::string to_cxt(const FormalContext& ctx) {
    std::ostringstream out;
    write_cxt(out, ctx);
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON context: {objects:[...], attributes:[...], incidence:[[bool]]}

inline Json context_to_json(const FormalContext& ctx) {
    Json inc = Json::array();
    for (std::size_t g = 0; g < ctx.object_count(); ++g) {
        Json row = Json::array();
        for (std::size_t m = 0; m < ctx.attribute_count(); ++m) row.push_back(ctx.incident(g, m));
        inc.push_back(std::move(row));
    }
    return {{"objects", ctx.objects()}, {"attributes", ctx.attributes()}, {"incidence", std::move(inc)}};
}

inline FormalContext context_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("context JSON must be an object");
    for (const char* key : {"objects", "attributes", "incidence"})
        if (!j.contains(key) || !j[key].is_array()) throw InputError(std::string("context JSON needs array '") + key + "'");
    std::vector<std::string> objects, attributes;
    for (const auto& s : j["objects"]) {
        if (!s.is_string()) throw InputError("object names must be strings");
        objects.push_back(s.get<std::string>());
    }
    for (const auto& s : j["attributes"]) {
        if (!s.is_string()) throw InputError("attribute names must be strings");
        attributes.push_back(s.get<std::string>());
    }
    std::vector<std::vector<bool>> rows;
    for (const auto& r : j["incidence"]) {
        if (!r.is_array()) throw InputError("incidence rows must be arrays");
        std::vector<bool> row;
        for (const auto& v : r) {
            if (v.is_boolean()) row.push_back(v.get<bool>());
            else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) row.push_back(v.get<int>() == 1);
            else throw InputError("incidence entries must be booleans");
        }
        rows.push_back(std::move(row));
    }
    return FormalContext(std::move(objects), std::move(attributes), rows);
}

/// Sniffs the format: JSON if the first non-space byte is '{', .cxt otherwise.
inline FormalContext parse_context(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw InputError(std::string("context JSON: ") + e.what());
        }
        return context_from_json(j);
    }
    return read_cxt_string(text);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << bytes;
    if (!out) throw InputError("write failed: " + path);
}

inline FormalContext load_context(const std::string& path) { return parse_context(read_file(path)); }

inline Json parse_json(const std::string& text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string(what) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Lattice and layout JSON

namespace detail {

inline std::vector<std::string> names_of(const BitSet& set, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (set.test(i)) out.push_back(names[i]);
    return out;
}

} // namespace detail

/// Concepts with extents, intents and reduced labels (each object at its
/// object concept, each attribute at its attribute concept), plus covers.
inline Json lattice_to_json(const ConceptLattice& lat) {
    const FormalContext& ctx = lat.context();
    std::vector<std::vector<std::string>> own_objects(lat.size()), own_attributes(lat.size());
    for (std::size_t g = 0; g < ctx.object_count(); ++g) own_objects[lat.object_concept(g)].push_back(ctx.objects()[g]);
    for (std::size_t m = 0; m < ctx.attribute_count(); ++m)
        own_attributes[lat.attribute_concept(m)].push_back(ctx.attributes()[m]);
    Json concepts = Json::array();
    for (std::size_t c = 0; c < lat.size(); ++c) {
        const Concept& k = lat.concept_at(c);
        concepts.push_back({{"concept", c},
                            {"extent", detail::names_of(k.extent, ctx.objects())},
                            {"intent", detail::names_of(k.intent, ctx.attributes())},
                            {"labels", {{"objects", own_objects[c]}, {"attributes", own_attributes[c]}}}});
    }
    Json covers = Json::array();
    for (const auto& [lo, hi] : lat.covers()) covers.push_back({lo, hi});
    return {{"context", context_to_json(ctx)},
            {"concepts", std::move(concepts)},
            {"covers", std::move(covers)},
            {"top", lat.top()},
            {"bottom", lat.bottom()}};
}

inline Json layout_to_json(const ConceptLattice& lat, const Layout& layout) {
    if (layout.size() != lat.size()) throw std::invalid_argument("layout does not cover the lattice");
    const FormalContext& ctx = lat.context();
    Json nodes = Json::array();
    for (std::size_t c = 0; c < lat.size(); ++c) {
        Json n{{"concept", c},
               {"extent", detail::names_of(lat.concept_at(c).extent, ctx.objects())},
               {"intent", detail::names_of(lat.concept_at(c).intent, ctx.attributes())},
               {"x", layout.at(c, 0)},
               {"y", layout.at(c, layout.dimension() - 1)}};
        if (layout.dimension() > 2) {
            n["coords"] = Json::array();
            for (std::size_t a = 0; a < layout.dimension(); ++a) n["coords"].push_back(layout.at(c, a));
        }
        nodes.push_back(std::move(n));
    }
    return {{"dimension", layout.dimension()}, {"nodes", std::move(nodes)}};
}

/// Nodes are matched to concepts by intent (or extent) names when present,
/// by the "concept" index otherwise.  Every concept must get exactly one node.
inline Layout layout_from_json(const Json& j, const ConceptLattice& lat) {
    if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
        throw InputError("layout JSON needs a 'nodes' array");
    const std::size_t dim = j.value("dimension", std::size_t{2});
    if (dim < 2) throw InputError("layout dimension must be at least 2");
    const FormalContext& ctx = lat.context();
    auto to_set = [&](const Json& names, const std::vector<std::string>& universe, const char* what) {
        BitSet s(universe.size());
        for (const auto& n : names) {
            if (!n.is_string()) throw InputError(std::string(what) + " entries must be strings");
            const auto it = std::find(universe.begin(), universe.end(), n.get<std::string>());
            if (it == universe.end()) throw InputError(std::string("unknown ") + what + " name '" + n.get<std::string>() + "'");
            s.set(static_cast<std::size_t>(it - universe.begin()));
        }
        return s;
    };
    Layout out(lat.size(), dim);
    std::vector<bool> seen(lat.size(), false);
    for (const auto& n : j["nodes"]) {
        if (!n.is_object()) throw InputError("layout nodes must be objects");
        std::optional<std::size_t> c;
        if (n.contains("intent")) {
            c = lat.index_of_intent(to_set(n["intent"], ctx.attributes(), "attribute"));
            if (!c) throw InputError("layout node intent is not a concept intent");
        } else if (n.contains("extent")) {
            c = lat.index_of_extent(to_set(n["extent"], ctx.objects(), "object"));
            if (!c) throw InputError("layout node extent is not a concept extent");
        } else if (n.contains("concept") && n["concept"].is_number_unsigned()) {
            c = n["concept"].get<std::size_t>();
            if (*c >= lat.size()) throw InputError("layout node concept index out of range");
        } else {
            throw InputError("layout node needs intent, extent or concept");
        }
        if (seen[*c]) throw InputError("two layout nodes for concept " + std::to_string(*c));
        seen[*c] = true;
        if (dim > 2) {
            if (!n.contains("coords") || !n["coords"].is_array() || n["coords"].size() != dim)
                throw InputError("layout node needs 'coords' of length dimension");
            for (std::size_t a = 0; a < dim; ++a) out.at(*c, a) = n["coords"][a].get<double>();
        } else {
            if (!n.contains("x") || !n.contains("y") || !n["x"].is_number() || !n["y"].is_number())
                throw InputError("layout node needs numeric x and y");
            out.set(*c, {n["x"].get<double>(), n["y"].get<double>()});
        }
    }
    for (std::size_t c = 0; c < lat.size(); ++c)
        if (!seen[c]) throw InputError("layout has no node for concept " + std::to_string(c));
    return out;
}

inline Layout load_layout(const std::string& path, const ConceptLattice& lat) {
    return layout_from_json(parse_json(read_file(path), "layout JSON"), lat);
}

// ---------------------------------------------------------------------------
// Results

inline Json extension_to_json(const ExtensionResult& r) {
    Json added = Json::array();
    for (const auto& p : r.added) added.push_back({p.first, p.second});
    Json ext = Json::array();
    for (const auto& e : r.realizer.extensions) ext.push_back(e);
    return {{"k", r.k()}, {"added", std::move(added)}, {"realizer", std::move(ext)},
            {"minimal", r.minimal}, {"budgetExceeded", r.budget_exceeded}};
}

inline Json metrics_to_json(const QualityMetrics& q) {
    Json j{{"minConflictDistance", q.min_conflict_distance},
           {"edgeCrossings", q.edge_crossings},
           {"distinctSlopes", q.distinct_slopes}};
    if (q.reference_distance) j["referenceDistance"] = *q.reference_distance;
    return j;
}

inline Json validity_to_json(const ValidityReport& v) {
    auto num = [](double d) { return std::isfinite(d) ? Json(d) : Json(nullptr); };
    Json inverted = Json::array();
    for (const auto& [lo, hi] : v.inverted_covers) inverted.push_back({lo, hi});
    return {{"valid", v.valid()},
            {"coversIncreasing", v.covers_increasing},
            {"nodesSeparated", v.nodes_separated},
            {"edgesClear", v.edges_clear},
            {"minCoverRise", num(v.min_cover_rise)},
            {"minNodeDistance", num(v.min_node_distance)},
            {"minConflictDistance", num(v.min_conflict_distance)},
            {"invertedCovers", std::move(inverted)}};
}

inline Json trace_row_to_json(const TraceRow& r) {
    return {{"iteration", r.iteration}, {"rep", r.energy.rep}, {"att", r.energy.att},
            {"grav", r.energy.grav}, {"maxForce", r.max_force}};
}

inline Json pipeline_result_to_json(const ConceptLattice& lat, Algorithm algo, const PipelineResult& r) {
    Json trace = Json::array();
    for (const auto& row : r.trace) trace.push_back(trace_row_to_json(row));
    return {{"algorithm", to_string(algo)},
            {"stages",
             {{"embedded", layout_to_json(lat, r.stages.embedded)},
              {"projected", layout_to_json(lat, r.stages.projected)},
              {"refined", layout_to_json(lat, r.stages.refined)}}},
            {"metrics",
             {{"embedded", metrics_to_json(r.embedded_metrics)},
              {"projected", metrics_to_json(r.projected_metrics)},
              {"refined", metrics_to_json(r.refined_metrics)}}},
            {"extension", extension_to_json(r.extension)},
            {"validity", validity_to_json(r.validity)},
            {"projectionResidual", r.projection_residual},
            {"converged", r.converged},
            {"singular", r.singular},
            {"budgetExceeded", r.budget_exceeded},
            {"trace", std::move(trace)}};
}

// ---------------------------------------------------------------------------
// Evaluation table

inline void write_eval_csv(std::ostream& os, const std::vector<BatchRow>& rows) {
    os << "id,algorithm,concepts,ok,valid,converged,budget_exceeded,min_conflict_distance,edge_crossings,"
          "distinct_slopes,reference_distance,reference_distance_normalized,seconds,error\n";
    const auto flags = os.flags();
    os << std::setprecision(10);
    for (const auto& r : rows) {
        os << r.id << ',' << to_string(r.algorithm) << ',' << r.concepts << ',' << r.ok << ',' << r.valid << ','
           << r.converged << ',' << r.budget_exceeded << ',' << r.metrics.min_conflict_distance << ','
           << r.metrics.edge_crossings << ',' << r.metrics.distinct_slopes << ',';
        if (r.metrics.reference_distance) os << *r.metrics.reference_distance;
        os << ',';
        if (r.reference_distance_normalized) os << *r.reference_distance_normalized;
        os << ',' << r.seconds << ',';
        std::string err = r.error;
        for (char& c : err)
            if (c == ',' || c == '\n' || c == '"') c = ' ';
        os << err << '\n';
    }
    os.flags(flags);
}

inline Json eval_to_json(const std::vector<BatchRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        Json j{{"id", r.id}, {"algorithm", to_string(r.algorithm)}, {"concepts", r.concepts}, {"ok", r.ok},
               {"valid", r.valid}, {"converged", r.converged}, {"budgetExceeded", r.budget_exceeded},
               {"metrics", metrics_to_json(r.metrics)}, {"seconds", r.seconds}};
        if (r.reference_distance_normalized) j["referenceDistanceNormalized"] = *r.reference_distance_normalized;
        if (!r.ok) j["error"] = r.error;
        out.push_back(std::move(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

/// Flat JSON object with ForceConfig field names plus "conflict_budget".
/// Unknown keys are rejected so typos do not pass silently.
inline PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig cfg = {}) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    auto& f = cfg.forces;
    for (const auto& [key, v] : j.items()) {
        auto real = [&](double& dst) {
            if (!v.is_number()) throw InputError("config '" + key + "' must be a number");
            dst = v.get<double>();
        };
        auto count = [&](auto& dst) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw InputError("config '" + key + "' must be a non-negative integer");
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(v.get<long long>());
        };
        if (key == "max_iterations") count(f.max_iterations);
        else if (key == "convergence_tol") real(f.convergence_tol);
        else if (key == "initial_step") real(f.initial_step);
        else if (key == "w_rep") real(f.w_rep);
        else if (key == "w_att") real(f.w_att);
        else if (key == "w_grav") real(f.w_grav);
        else if (key == "parabola_a") real(f.parabola_a);
        else if (key == "parabola_c") real(f.parabola_c);
        else if (key == "spacing") real(f.spacing);
        else if (key == "delta") real(f.delta);
        else if (key == "jitter") real(f.jitter);
        else if (key == "seed") count(f.seed);
        else if (key == "conflict_budget") {
            if (!v.is_number_integer()) throw InputError("config 'conflict_budget' must be an integer");
            cfg.budget.conflicts = v.get<std::int64_t>();
        } else {
            throw InputError("unknown config key '" + key + "'");
        }
    }
    try {
        f.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline Json pipeline_config_to_json(const PipelineConfig& cfg) {
    const auto& f = cfg.forces;
    return {{"max_iterations", f.max_iterations}, {"convergence_tol", f.convergence_tol},
            {"initial_step", f.initial_step},     {"w_rep", f.w_rep},
            {"w_att", f.w_att},                   {"w_grav", f.w_grav},
            {"parabola_a", f.parabola_a},         {"parabola_c", f.parabola_c},
            {"spacing", f.spacing},               {"delta", f.delta},
            {"jitter", f.jitter},                 {"seed", f.seed},
            {"conflict_budget", cfg.budget.conflicts}};
}

/// The explicit flag wins over the LATFLUX_CONFIG environment variable.
inline std::optional<std::string> config_path(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("LATFLUX_CONFIG"); env && *env) return std::string(env);
    return std::nullopt;
}

inline PipelineConfig load_pipeline_config(const std::string& flag_value) {
    const auto path = config_path(flag_value);
    if (!path) return {};
    return pipeline_config_from_json(parse_json(read_file(*path), "config"));
}

} // namespace latflux

#endif // LATFLUX_IO_HPP
