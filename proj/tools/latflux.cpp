// latflux command line driver.
//
// Exit codes: 0 success, 1 input error, 2 the run finished but is flagged
// (optimizer did not converge, or a search budget ran out).

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <latflux/latflux.hpp>
#include <latflux/service.hpp>

using namespace latflux;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kFlagged = 2;

void emit(const std::string& out_path, const std::string& bytes) {
    if (out_path.empty() || out_path == "-") std::cout << bytes;
    else write_file(out_path, bytes);
}

RepresentationKind parse_representation(const std::string& s) {
    if (s == "doubly") return RepresentationKind::DoublyAdditive;
    if (s == "attribute") return RepresentationKind::AttributeAdditive;
    if (s == "object") return RepresentationKind::ObjectAdditive;
    if (s == "dual-attribute") return RepresentationKind::DualAttribute;
    throw InputError("unknown representation '" + s + "'");
}

struct LayoutArgs {
    std::string layout;
    std::string context;
    std::string representation = "doubly";
    std::string out;
};

void layout_args(CLI::App* sub, LayoutArgs& a) {
    sub->add_option("layout", a.layout, "Layout JSON")->required();
    sub->add_option("context", a.context, "Context (.cxt or JSON)")->required();
    sub->add_option("-r,--representation", a.representation, "doubly | attribute | object | dual-attribute");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Additive line diagrams of concept lattices"};
    app.require_subcommand(1);
    std::string config_flag;
    app.add_option("--config", config_flag, "JSON config file (overrides LATFLUX_CONFIG)");

    // lattice
    std::string lat_ctx, lat_out;
    auto* lattice_cmd = app.add_subcommand("lattice", "Concepts, covers and labels as JSON");
    lattice_cmd->add_option("context", lat_ctx, "Context (.cxt or JSON)")->required();
    lattice_cmd->add_option("-o,--output", lat_out, "Output file (default stdout)");

    // draw
    std::string draw_algo, draw_ctx, draw_out, draw_full, draw_trace, draw_svg, draw_tikz;
    std::int64_t draw_budget = -1;
    auto* draw_cmd = app.add_subcommand("draw", "Run a layout algorithm");
    draw_cmd->add_option("--algo", draw_algo, "attr-fdp | doubly-fdp | dimdraw | dimflux")
        ->required()
        ->check(CLI::IsMember({"attr-fdp", "doubly-fdp", "dimdraw", "dimflux"}));
    draw_cmd->add_option("context", draw_ctx, "Context (.cxt or JSON)")->required();
    draw_cmd->add_option("-o,--output", draw_out, "Layout JSON of the final stage (default stdout)");
    draw_cmd->add_option("--result", draw_full, "Full result JSON: stages, metrics, extension, trace");
    draw_cmd->add_option("--trace", draw_trace, "Energy trace CSV");
    draw_cmd->add_option("--svg", draw_svg, "Also render SVG");
    draw_cmd->add_option("--tikz", draw_tikz, "Also render TikZ");
    draw_cmd->add_option("--budget", draw_budget, "SAT conflict budget per solver call (negative: none)");

    // project
    LayoutArgs proj;
    auto* project_cmd = app.add_subcommand("project", "Nearest additive layout");
    layout_args(project_cmd, proj);
    project_cmd->add_option("-o,--output", proj.out, "Output file (default stdout)");

    // check-additive
    LayoutArgs chk;
    double chk_tol = 1e-6;
    auto* check_cmd = app.add_subcommand("check-additive", "Report whether a layout is additive");
    layout_args(check_cmd, chk);
    check_cmd->add_option("--tol", chk_tol, "Tolerance on the largest coordinate deviation");

    // snap
    LayoutArgs snp;
    double snap_step = 0.0;
    auto* snap_cmd = app.add_subcommand("snap", "Round element vectors to a grid");
    layout_args(snap_cmd, snp);
    snap_cmd->add_option("--grid", snap_step, "Grid step")->required()->check(CLI::PositiveNumber);
    snap_cmd->add_option("-o,--output", snp.out, "Output file (default stdout)");

    // metrics
    LayoutArgs met;
    std::string met_ref;
    auto* metrics_cmd = app.add_subcommand("metrics", "Quality metrics and validity of a layout");
    layout_args(metrics_cmd, met);
    metrics_cmd->add_option("--reference", met_ref, "Reference layout JSON");

    // render
    LayoutArgs ren;
    std::string ren_format = "svg", ren_labels = "reduced-labels";
    RenderOptions ren_opts;
    auto* render_cmd = app.add_subcommand("render", "SVG, TikZ or JSON document of a layout");
    layout_args(render_cmd, ren);
    render_cmd->add_option("-f,--format", ren_format, "svg | tikz | json")
        ->check(CLI::IsMember({"svg", "tikz", "json"}));
    render_cmd->add_option("--labels", ren_labels, "none | extents+intents | reduced-labels")
        ->check(CLI::IsMember({"none", "extents+intents", "reduced-labels"}));
    render_cmd->add_option("--node-radius", ren_opts.node_radius);
    render_cmd->add_option("--edge-width", ren_opts.edge_width);
    render_cmd->add_option("--padding", ren_opts.canvas_padding);
    render_cmd->add_option("-o,--output", ren.out, "Output file (default stdout)");

    // eval126
    std::vector<std::string> eval_algos;
    std::string eval_csv, eval_json;
    unsigned eval_threads = 1;
    auto* eval_cmd = app.add_subcommand("eval126", "Run algorithms on the 126 four-meet-irreducible lattices");
    eval_cmd->add_option("--algo", eval_algos, "Algorithms (default: all four)")
        ->check(CLI::IsMember({"attr-fdp", "doubly-fdp", "dimdraw", "dimflux"}));
    eval_cmd->add_option("--csv", eval_csv, "Evaluation table CSV");
    eval_cmd->add_option("--json", eval_json, "Evaluation table JSON");
    eval_cmd->add_option("--threads", eval_threads, "Worker threads")->check(CLI::PositiveNumber);

    // serve
    ServiceOptions serve_opts;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP layout service");
    serve_cmd->add_option("--port", serve_opts.port, "Port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", serve_opts.host, "Bind address");
    serve_cmd->add_option("--origin", serve_opts.allowed_origin, "Allowed CORS origin");

    if (argc <= 1) {
        std::cerr << app.help();
        return kInputError;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kInputError;
    }

    try {
        PipelineConfig cfg = load_pipeline_config(config_flag);

        if (*lattice_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(lat_ctx));
            emit(lat_out, lattice_to_json(lat).dump(2) + "\n");
            return kOk;
        }

        if (*draw_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(draw_ctx));
            if (draw_cmd->count("--budget")) cfg.budget.conflicts = draw_budget;
            const Algorithm algo = *parse_algorithm(draw_algo);
            const PipelineResult r = run_algorithm(lat, algo, cfg);
            emit(draw_out, layout_to_json(lat, r.stages.refined).dump(2) + "\n");
            if (!draw_full.empty()) write_file(draw_full, pipeline_result_to_json(lat, algo, r).dump(2) + "\n");
            if (!draw_trace.empty()) {
                std::ostringstream csv;
                write_trace_csv(csv, r.trace);
                write_file(draw_trace, csv.str());
            }
            RenderOptions ro;
            if (!draw_svg.empty()) write_file(draw_svg, render(lat, r.stages.refined, ro));
            if (!draw_tikz.empty()) {
                ro.format = RenderFormat::Tikz;
                write_file(draw_tikz, render(lat, r.stages.refined, ro));
            }
            std::cerr << draw_algo << ": " << lat.size() << " concepts, valid=" << r.validity.valid()
                      << " converged=" << r.converged << " budget_exceeded=" << r.budget_exceeded << "\n";
            return (!r.converged || r.budget_exceeded) ? kFlagged : kOk;
        }

        if (*project_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(proj.context));
            const Layout layout = load_layout(proj.layout, lat);
            const AdditiveBasis basis = build_srm(lat, parse_representation(proj.representation));
            const Layout p = project_additive_translated(basis, layout);
            emit(proj.out, layout_to_json(lat, p).dump(2) + "\n");
            std::cerr << "residual " << layout_distance(layout, p) << "\n";
            return kOk;
        }

        if (*check_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(chk.context));
            const Layout layout = load_layout(chk.layout, lat);
            const AdditiveBasis basis = build_srm(lat, parse_representation(chk.representation));
            const AdditivityReport rep = is_additive(basis, layout, chk_tol);
            std::printf("%s\nresidual %.12g\nmax deviation %.12g\n", rep.additive ? "additive" : "not additive",
                        rep.residual, rep.max_deviation);
            return kOk;
        }

        if (*snap_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(snp.context));
            const Layout layout = load_layout(snp.layout, lat);
            const AdditiveBasis basis = build_srm(lat, parse_representation(snp.representation));
            const Layout s = snap_to_grid(basis, layout, snap_step);
            emit(snp.out, layout_to_json(lat, s).dump(2) + "\n");
            const bool ok = validate_line_diagram(lat, s).valid();
            std::cerr << (ok ? "valid" : "not a valid line diagram") << "\n";
            return kOk;
        }

        if (*metrics_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(met.context));
            const Layout layout = load_layout(met.layout, lat);
            QualityMetrics q = quality_metrics(lat, layout);
            if (!met_ref.empty()) q.reference_distance = layout_distance(layout, load_layout(met_ref, lat));
            const AdditiveBasis basis = build_srm(lat, parse_representation(met.representation));
            const AdditivityReport add = is_additive(basis, layout, 1e-6);
            const Json out{{"metrics", metrics_to_json(q)},
                           {"validity", validity_to_json(validate_line_diagram(lat, layout))},
                           {"additive", add.additive},
                           {"residual", add.residual}};
            std::cout << out.dump(2) << "\n";
            return kOk;
        }

        if (*render_cmd) {
            const ConceptLattice lat = compute_lattice(load_context(ren.context));
            const Layout layout = load_layout(ren.layout, lat);
            ren_opts.format = *parse_render_format(ren_format);
            ren_opts.label_mode = *parse_label_mode(ren_labels);
            emit(ren.out, render(lat, layout, ren_opts));
            return kOk;
        }

        if (*eval_cmd) {
            std::vector<Algorithm> algos;
            for (const auto& a : eval_algos) algos.push_back(*parse_algorithm(a));
            if (algos.empty())
                algos = {Algorithm::AttributeFdp, Algorithm::DoublyFdp, Algorithm::DimDraw, Algorithm::DimFlux};
            const auto rows = batch_evaluate(four_meet_irreducible_inputs(), algos, cfg, eval_threads);
            if (!eval_csv.empty()) {
                std::ostringstream csv;
                write_eval_csv(csv, rows);
                write_file(eval_csv, csv.str());
            }
            if (!eval_json.empty()) write_file(eval_json, eval_to_json(rows).dump(2) + "\n");
            bool flagged = false;
            for (Algorithm a : algos) {
                std::vector<BatchRow> mine;
                for (const auto& r : rows)
                    if (r.algorithm == a) mine.push_back(r);
                const BatchSummary s = summarize(mine);
                std::size_t budget = 0;
                for (const auto& r : mine) budget += r.budget_exceeded;
                std::printf("%-10s rows %zu valid %zu failed %zu non-converged %zu budget-exceeded %zu\n",
                            to_string(a), s.rows, s.valid, s.failed, s.non_converged, budget);
                flagged |= s.non_converged > 0 || budget > 0;
            }
            return flagged ? kFlagged : kOk;
        }

        if (*serve_cmd) {
            LayoutService svc(serve_opts);
            std::cerr << "listening on " << serve_opts.host << ":" << serve_opts.port << "\n";
            if (!svc.listen()) {
                std::cerr << "cannot bind " << serve_opts.host << ":" << serve_opts.port << "\n";
                return kInputError;
            }
            return kOk;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
