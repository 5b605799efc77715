#ifndef LATFLUX_RENDER_HPP
#define LATFLUX_RENDER_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "additive.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "layout.hpp"

namespace latflux {

enum class LabelMode { None, ExtentsIntents, Reduced };
enum class RenderFormat { Svg, Tikz, Json };

struct RenderOptions {
    double node_radius = 5.0;     // SVG px; TikZ pt
    double edge_width = 1.0;      // SVG px; TikZ pt
    double canvas_padding = 30.0; // SVG px around the drawing
    double scale = 40.0;          // SVG px per layout unit
    double tikz_unit = 0.5;       // cm per layout unit
    LabelMode label_mode = LabelMode::Reduced;
    RenderFormat format = RenderFormat::Svg;

    void validate() const {
        for (double v : {node_radius, edge_width, canvas_padding, scale, tikz_unit})
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("render dimensions must be positive");
    }
};

inline std::optional<RenderFormat> parse_render_format(const std::string& s) {
    if (s == "svg") return RenderFormat::Svg;
    if (s == "tikz") return RenderFormat::Tikz;
    if (s == "json") return RenderFormat::Json;
    return std::nullopt;
}

inline std::optional<LabelMode> parse_label_mode(const std::string& s) {
    if (s == "none") return LabelMode::None;
    if (s == "extents+intents" || s == "full") return LabelMode::ExtentsIntents;
    if (s == "reduced-labels" || s == "reduced") return LabelMode::Reduced;
    return std::nullopt;
}

namespace detail {

// Fixed three decimals through the C locale; never prints "-0.000".
inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

inline std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
    return out;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string tex_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '\\': out += "\\textbackslash{}"; break;
        case '~': out += "\\textasciitilde{}"; break;
        case '^': out += "\\textasciicircum{}"; break;
        case '&': case '%': case '$': case '#': case '_': case '{': case '}':
            out += '\\';
            out += c;
            break;
        default: out += c;
        }
    }
    return out;
}

struct NodeLabels {
    std::string above; // attributes
    std::string below; // objects
};

inline std::vector<NodeLabels> node_labels(const ConceptLattice& lat, LabelMode mode) {
    std::vector<NodeLabels> out(lat.size());
    if (mode == LabelMode::None) return out;
    const FormalContext& ctx = lat.context();
    if (mode == LabelMode::ExtentsIntents) {
        for (std::size_t c = 0; c < lat.size(); ++c) {
            out[c].above = join(names_of(lat.concept_at(c).intent, ctx.attributes()));
            out[c].below = join(names_of(lat.concept_at(c).extent, ctx.objects()));
        }
        return out;
    }
    std::vector<std::vector<std::string>> objs(lat.size()), atts(lat.size());
    for (std::size_t g = 0; g < ctx.object_count(); ++g) objs[lat.object_concept(g)].push_back(ctx.objects()[g]);
    for (std::size_t m = 0; m < ctx.attribute_count(); ++m)
        atts[lat.attribute_concept(m)].push_back(ctx.attributes()[m]);
    for (std::size_t c = 0; c < lat.size(); ++c) out[c] = {join(atts[c]), join(objs[c])};
    return out;
}

inline std::string render_svg(const ConceptLattice& lat, const Layout& layout, const RenderOptions& o) {
    const Bounds b = bounds(layout);
    const double w = b.width() * o.scale + 2 * o.canvas_padding;
    const double h = b.height() * o.scale + 2 * o.canvas_padding;
    // y grows downwards on the canvas, so flip around the top of the box
    auto sx = [&](double x) { return o.canvas_padding + (x - b.min_x) * o.scale; };
    auto sy = [&](double y) { return o.canvas_padding + (b.max_y - y) * o.scale; };
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n";
    s += "<g stroke=\"black\" stroke-width=\"" + fmt(o.edge_width) + "\">\n";
    for (const auto& [lo, hi] : lat.covers()) {
        const Vec2 p = layout.point(lo), q = layout.point(hi);
        s += "<line x1=\"" + fmt(sx(p.x)) + "\" y1=\"" + fmt(sy(p.y)) + "\" x2=\"" + fmt(sx(q.x)) + "\" y2=\"" +
             fmt(sy(q.y)) + "\"/>\n";
    }
    s += "</g>\n<g fill=\"white\" stroke=\"black\" stroke-width=\"" + fmt(o.edge_width) + "\">\n";
    for (std::size_t c = 0; c < layout.size(); ++c) {
        const Vec2 p = layout.point(c);
        s += "<circle id=\"c" + std::to_string(c) + "\" cx=\"" + fmt(sx(p.x)) + "\" cy=\"" + fmt(sy(p.y)) +
             "\" r=\"" + fmt(o.node_radius) + "\"/>\n";
    }
    s += "</g>\n";
    if (o.label_mode != LabelMode::None) {
        const auto labels = node_labels(lat, o.label_mode);
        s += "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
        for (std::size_t c = 0; c < layout.size(); ++c) {
            const Vec2 p = layout.point(c);
            if (!labels[c].above.empty())
                s += "<text x=\"" + fmt(sx(p.x)) + "\" y=\"" + fmt(sy(p.y) - o.node_radius - 3) + "\">" +
                     xml_escape(labels[c].above) + "</text>\n";
            if (!labels[c].below.empty())
                s += "<text x=\"" + fmt(sx(p.x)) + "\" y=\"" + fmt(sy(p.y) + o.node_radius + 12) + "\">" +
                     xml_escape(labels[c].below) + "</text>\n";
        }
        s += "</g>\n";
    }
    s += "</svg>\n";
    return s;
}

inline std::string render_tikz(const ConceptLattice& lat, const Layout& layout, const RenderOptions& o) {
    auto pt = [&](std::size_t c) {
        const Vec2 p = layout.point(c);
        return "(" + fmt(p.x) + "," + fmt(p.y) + ")";
    };
    std::string s = "\\begin{tikzpicture}[x=" + fmt(o.tikz_unit) + "cm,y=" + fmt(o.tikz_unit) + "cm]\n";
    for (const auto& [lo, hi] : lat.covers())
        s += "\\draw[line width=" + fmt(o.edge_width) + "pt] " + pt(lo) + " -- " + pt(hi) + ";\n";
    for (std::size_t c = 0; c < layout.size(); ++c)
        s += "\\filldraw[fill=white,draw=black,line width=" + fmt(o.edge_width) + "pt] " + pt(c) + " circle (" +
             fmt(o.node_radius) + "pt);\n";
    if (o.label_mode != LabelMode::None) {
        const auto labels = node_labels(lat, o.label_mode);
        for (std::size_t c = 0; c < layout.size(); ++c) {
            if (!labels[c].above.empty())
                s += "\\node[above=" + fmt(o.node_radius) + "pt,font=\\small] at " + pt(c) + " {" +
                     tex_escape(labels[c].above) + "};\n";
            if (!labels[c].below.empty())
                s += "\\node[below=" + fmt(o.node_radius) + "pt,font=\\small] at " + pt(c) + " {" +
                     tex_escape(labels[c].below) + "};\n";
        }
    }
    s += "\\end{tikzpicture}\n";
    return s;
}

} // namespace detail

/// Document bytes for the diagram.  Mathematical y-up throughout; only the
/// SVG writer flips the axis.  Output depends on nothing but the inputs.
inline std::string render(const ConceptLattice& lat, const Layout& layout, const RenderOptions& opts = {}) {
    opts.validate();
    if (layout.size() != lat.size()) throw std::invalid_argument("layout does not cover the lattice");
    if (!layout.finite()) throw std::invalid_argument("layout has non-finite coordinates");
    switch (opts.format) {
    case RenderFormat::Svg: return detail::render_svg(lat, layout, opts);
    case RenderFormat::Tikz: return detail::render_tikz(lat, layout, opts);
    case RenderFormat::Json: break;
    }
    Json j = layout_to_json(lat, layout);
    Json covers = Json::array();
    for (const auto& [lo, hi] : lat.covers()) covers.push_back({lo, hi});
    j["covers"] = std::move(covers);
    if (opts.label_mode != LabelMode::None) {
        const auto labels = detail::node_labels(lat, opts.label_mode);
        for (std::size_t c = 0; c < lat.size(); ++c)
            j["nodes"][c]["labels"] = {{"above", labels[c].above}, {"below", labels[c].below}};
    }
    return j.dump(2) + "\n";
}

} // namespace latflux

#endif // LATFLUX_RENDER_HPP
