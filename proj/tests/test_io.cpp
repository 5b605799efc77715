#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <latflux/latflux.hpp>

#include "reference_layouts.hpp"

using namespace latflux;

namespace {

const std::string kData = LATFLUX_DATA_DIR;

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("latflux_test_" + name)).string();
}

FormalContext random_context(std::mt19937& rng, std::size_t g, std::size_t m) {
    std::bernoulli_distribution coin(0.4);
    std::vector<std::string> objs, atts;
    for (std::size_t i = 0; i < g; ++i) objs.push_back("o" + std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) atts.push_back("a" + std::to_string(j));
    std::vector<std::vector<bool>> inc(g, std::vector<bool>(m));
    for (auto& row : inc)
        for (std::size_t j = 0; j < m; ++j) row[j] = coin(rng);
    return FormalContext(objs, atts, inc);
}

} // namespace

// ---------------------------------------------------------------------------

TEST(Cxt, WriterIsBitExact) {
    const FormalContext ctx({"g1", "g2"}, {"m1", "m2", "m3"}, {{true, false, true}, {false, false, false}});
    EXPECT_EQ(to_cxt(ctx), "B\n\n2\n3\ng1\ng2\nm1\nm2\nm3\nX.X\n...\n");
}

TEST(Cxt, RoundTripIsIdentity) {
    for (const auto& ctx : {contexts::dwarf_planets(), contexts::fm3(), contexts::b3(), contexts::chain(1)})
        EXPECT_EQ(read_cxt_string(to_cxt(ctx)), ctx);
    std::mt19937 rng(5);
    for (int i = 0; i < 50; ++i) {
        const FormalContext ctx = random_context(rng, rng() % 7, rng() % 7);
        const std::string text = to_cxt(ctx);
        EXPECT_EQ(read_cxt_string(text), ctx);
        EXPECT_EQ(to_cxt(read_cxt_string(text)), text);
    }
}

TEST(Cxt, ToleratesLowercaseCrossesCrlfAndBlankAfterCounts) {
    const FormalContext want({"a", "b"}, {"x", "y"}, {{true, false}, {true, true}});
    EXPECT_EQ(read_cxt_string("B\r\n\r\n2\r\n2\r\na\r\nb\r\nx\r\ny\r\nx.\r\nxX\r\n"), want);
    EXPECT_EQ(read_cxt_string("B\n\n2\n2\n\na\nb\nx\ny\nX.\nXX\n\n\n"), want);
    EXPECT_EQ(read_cxt_string("B\n2\n2\na\nb\nx\ny\nX.\nXX"), want);
}

TEST(Cxt, RejectsMalformedInput) {
    for (const char* bad : {"", "A\n\n1\n1\ng\nm\nX\n", "B\n\none\n1\ng\nm\nX\n", "B\n\n1\n1\ng\nm\nXX\n",
                            "B\n\n1\n1\ng\nm\n?\n", "B\n\n2\n1\ng\nm\nX\n", "B\n\n-1\n1\n"})
        EXPECT_THROW(read_cxt_string(bad), InputError) << bad;
}

TEST(ContextJson, RoundTripAndIntegerEntries) {
    const FormalContext ctx = contexts::dwarf_planets();
    EXPECT_EQ(context_from_json(context_to_json(ctx)), ctx);
    const Json j = Json::parse(R"({"objects":["g"],"attributes":["m","n"],"incidence":[[1,0]]})");
    const FormalContext c = context_from_json(j);
    EXPECT_TRUE(c.incident(0, 0));
    EXPECT_FALSE(c.incident(0, 1));
}

TEST(ContextJson, RejectsMalformedInput) {
    for (const char* bad : {R"([])", R"({"objects":["g"]})", R"({"objects":[1],"attributes":[],"incidence":[[]]})",
                            R"({"objects":["g"],"attributes":["m"],"incidence":[[2]]})",
                            R"({"objects":["g"],"attributes":["m"],"incidence":[]})",
                            R"({"objects":["g","g"],"attributes":["m"],"incidence":[[true],[false]]})"})
        EXPECT_THROW(context_from_json(Json::parse(bad)), InputError) << bad;
}

TEST(ContextJson, ParseContextSniffsTheFormat) {
    const FormalContext ctx = contexts::n5();
    EXPECT_EQ(parse_context(to_cxt(ctx)), ctx);
    EXPECT_EQ(parse_context("  \n" + context_to_json(ctx).dump()), ctx);
    EXPECT_THROW(parse_context("{ not json"), InputError);
}

TEST(DataFiles, DwarfPlanetsMatchTheBuiltIns) {
    const FormalContext ctx = load_context(kData + "/dwarf.cxt");
    EXPECT_EQ(ctx, contexts::dwarf_planets());
    const ConceptLattice lat = compute_lattice(ctx);
    EXPECT_LE(max_abs_difference(load_layout(kData + "/dwarf-hand.json", lat), reference::hand_drawn()), 0.0);
    EXPECT_LE(max_abs_difference(load_layout(kData + "/dwarf-projected.json", lat), reference::projected()), 0.0);
}

// ---------------------------------------------------------------------------

TEST(LayoutJson, RoundTripWithinTolerance) {
    const ConceptLattice lat = compute_lattice(contexts::fm3());
    std::mt19937 rng(11);
    std::normal_distribution<double> n(0.0, 100.0);
    for (int trial = 0; trial < 20; ++trial) {
        Layout l(lat.size());
        for (std::size_t c = 0; c < lat.size(); ++c) l.set(c, {n(rng), n(rng) * 1e-7});
        const Layout back = layout_from_json(Json::parse(layout_to_json(lat, l).dump()), lat);
        EXPECT_LE(max_abs_difference(l, back), 1e-12);
    }
    Layout l3(lat.size(), 3);
    for (std::size_t c = 0; c < lat.size(); ++c)
        for (std::size_t a = 0; a < 3; ++a) l3.at(c, a) = n(rng);
    EXPECT_EQ(layout_from_json(layout_to_json(lat, l3), lat), l3);
}

TEST(LayoutJson, MatchesNodesByIntentExtentOrIndex) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    const Layout ref = reference::hand_drawn();
    Json j = layout_to_json(lat, ref);
    std::reverse(j["nodes"].begin(), j["nodes"].end());
    EXPECT_EQ(layout_from_json(j, lat), ref);

    Json by_extent = j;
    for (auto& node : by_extent["nodes"]) node.erase("intent");
    EXPECT_EQ(layout_from_json(by_extent, lat), ref);

    Json by_index = j;
    for (auto& node : by_index["nodes"]) {
        node.erase("intent");
        node.erase("extent");
    }
    EXPECT_EQ(layout_from_json(by_index, lat), ref);
}

TEST(LayoutJson, RejectsIncompleteOrInconsistentLayouts) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    const Json good = layout_to_json(lat, reference::hand_drawn());

    Json missing = good;
    missing["nodes"].erase(3);
    EXPECT_THROW(layout_from_json(missing, lat), InputError);

    Json dup = good;
    dup["nodes"][1]["intent"] = good["nodes"][2]["intent"];
    EXPECT_THROW(layout_from_json(dup, lat), InputError);

    Json unknown = good;
    unknown["nodes"][0]["intent"] = Json::array({"Rings"});
    EXPECT_THROW(layout_from_json(unknown, lat), InputError);

    Json not_closed = good;
    not_closed["nodes"][0]["intent"] = Json::array({"Atmosphere", "Non-Spherical"});
    EXPECT_THROW(layout_from_json(not_closed, lat), InputError);

    Json no_x = good;
    no_x["nodes"][0].erase("x");
    EXPECT_THROW(layout_from_json(no_x, lat), InputError);
    EXPECT_THROW(layout_from_json(Json::array(), lat), InputError);
}

TEST(LatticeJson, ConceptsCoversAndReducedLabels) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    const Json j = lattice_to_json(lat);
    EXPECT_EQ(j["concepts"].size(), 11u);
    EXPECT_EQ(j["covers"].size(), lat.covers().size());
    std::size_t objects = 0, attributes = 0;
    for (const auto& c : j["concepts"]) {
        objects += c["labels"]["objects"].size();
        attributes += c["labels"]["attributes"].size();
    }
    EXPECT_EQ(objects, 5u);
    EXPECT_EQ(attributes, 4u);
    EXPECT_EQ(j["concepts"][0]["extent"].size(), 5u);
    EXPECT_EQ(j["top"], 0);
    EXPECT_EQ(j["bottom"], 10);
}

TEST(ExtensionJson, PairsByConceptIndex) {
    const ConceptLattice lat = compute_lattice(contexts::b3());
    const Json j = extension_to_json(minimal_extension(lat));
    EXPECT_EQ(j["k"], 1);
    ASSERT_EQ(j["added"].size(), 1u);
    EXPECT_EQ(j["added"][0].size(), 2u);
    EXPECT_EQ(j["realizer"].size(), 2u);
    EXPECT_TRUE(j["minimal"].get<bool>());
}

TEST(EvalTable, CsvHasOneLinePerRow) {
    std::vector<BatchInput> inputs;
    inputs.push_back({"b2", compute_lattice(contexts::b2()), std::nullopt});
    inputs.push_back({"n5", compute_lattice(contexts::n5()), std::nullopt});
    const auto rows = batch_evaluate(inputs, {Algorithm::DimFlux, Algorithm::DimDraw});
    std::ostringstream csv;
    write_eval_csv(csv, rows);
    const std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    EXPECT_EQ(text.rfind("id,algorithm,concepts,", 0), 0u);
    EXPECT_NE(text.find("n5,dimdraw,5,1,"), std::string::npos);
    EXPECT_EQ(eval_to_json(rows).size(), 4u);
}

// ---------------------------------------------------------------------------

TEST(Config, ReadsKnownKeysAndRejectsOthers) {
    const PipelineConfig cfg =
        pipeline_config_from_json(Json::parse(R"({"max_iterations": 50, "w_rep": 2.5, "conflict_budget": 10})"));
    EXPECT_EQ(cfg.forces.max_iterations, 50u);
    EXPECT_DOUBLE_EQ(cfg.forces.w_rep, 2.5);
    EXPECT_EQ(cfg.budget.conflicts, 10);
    EXPECT_EQ(pipeline_config_from_json(pipeline_config_to_json(cfg)).forces.w_rep, 2.5);
    EXPECT_THROW(pipeline_config_from_json(Json::parse(R"({"w_repp": 1})")), InputError);
    EXPECT_THROW(pipeline_config_from_json(Json::parse(R"({"w_rep": -1})")), InputError);
    EXPECT_THROW(pipeline_config_from_json(Json::parse(R"({"max_iterations": "many"})")), InputError);
    EXPECT_THROW(pipeline_config_from_json(Json::parse(R"([1])")), InputError);
}

TEST(Config, FlagWinsOverEnvironment) {
    const std::string env_file = temp_path("env.json"), flag_file = temp_path("flag.json");
    write_file(env_file, R"({"max_iterations": 7})");
    write_file(flag_file, R"({"max_iterations": 9})");
    ::setenv("LATFLUX_CONFIG", env_file.c_str(), 1);
    EXPECT_EQ(load_pipeline_config("").forces.max_iterations, 7u);
    EXPECT_EQ(load_pipeline_config(flag_file).forces.max_iterations, 9u);
    ::unsetenv("LATFLUX_CONFIG");
    EXPECT_EQ(load_pipeline_config("").forces.max_iterations, ForceConfig{}.max_iterations);
    EXPECT_THROW(load_pipeline_config(temp_path("missing.json")), InputError);
}

// ---------------------------------------------------------------------------

TEST(Render, ChainSvgDrawsTheUpperNodeHigher) {
    const ConceptLattice lat = compute_lattice(contexts::chain(1));
    ASSERT_EQ(lat.size(), 2u);
    Layout l(2);
    l.set(lat.top(), {0, 1});
    l.set(lat.bottom(), {0, 0});
    const std::string svg = render(lat, l);
    auto count = [&](const std::string& needle) {
        std::size_t n = 0;
        for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) ++n;
        return n;
    };
    EXPECT_EQ(count("<circle"), 2u);
    EXPECT_EQ(count("<line"), 1u);
    auto cy = [&](std::size_t c) {
        const auto p = svg.find("id=\"c" + std::to_string(c) + "\"");
        const auto q = svg.find("cy=\"", p) + 4;
        return std::stod(svg.substr(q));
    };
    EXPECT_LT(cy(lat.top()), cy(lat.bottom())); // canvas y grows downwards
}

TEST(Render, OutputIsDeterministic) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    for (auto f : {RenderFormat::Svg, RenderFormat::Tikz, RenderFormat::Json}) {
        RenderOptions o;
        o.format = f;
        EXPECT_EQ(render(lat, reference::projected(), o), render(lat, reference::projected(), o));
    }
}

TEST(Render, TikzMatchesGoldenFile) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    RenderOptions o;
    o.format = RenderFormat::Tikz;
    EXPECT_EQ(render(lat, reference::projected(), o), read_file(std::string(LATFLUX_GOLDEN_DIR) + "/dwarf-projected.tikz"));
}

TEST(Render, LabelModes) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    RenderOptions o;
    o.label_mode = LabelMode::Reduced;
    const std::string reduced = render(lat, reference::projected(), o);
    EXPECT_EQ(reduced.find(">Ceres, "), std::string::npos);
    std::size_t pluto = 0;
    for (auto p = reduced.find("Pluto"); p != std::string::npos; p = reduced.find("Pluto", p + 1)) ++pluto;
    EXPECT_EQ(pluto, 1u);
    o.label_mode = LabelMode::ExtentsIntents;
    EXPECT_NE(render(lat, reference::projected(), o).find("Ceres, Makemake, Eris, Heumea, Pluto"), std::string::npos);
    o.label_mode = LabelMode::None;
    EXPECT_EQ(render(lat, reference::projected(), o).find("<text"), std::string::npos);
}

TEST(Render, JsonFormatIsALayout) {
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    RenderOptions o;
    o.format = RenderFormat::Json;
    const Json j = Json::parse(render(lat, reference::projected(), o));
    EXPECT_EQ(layout_from_json(j, lat), reference::projected());
    EXPECT_EQ(j["covers"].size(), lat.covers().size());
}

TEST(Render, EscapesAndRejectsBadOptions) {
    const FormalContext ctx({"a<b"}, {"50%_&"}, {{true}});
    const ConceptLattice lat = compute_lattice(ctx);
    Layout l(lat.size());
    for (std::size_t c = 0; c < lat.size(); ++c) l.set(c, {0.0, static_cast<double>(lat.size() - c)});
    RenderOptions o;
    EXPECT_NE(render(lat, l, o).find("a&lt;b"), std::string::npos);
    o.format = RenderFormat::Tikz;
    EXPECT_NE(render(lat, l, o).find("50\\%\\_\\&"), std::string::npos);
    o.node_radius = 0.0;
    EXPECT_THROW(render(lat, l, o), std::invalid_argument);
    EXPECT_THROW(render(lat, Layout(lat.size() + 1), RenderOptions{}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Command line

#ifdef LATFLUX_CLI

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" + std::string(LATFLUX_CLI) + "\" " + args + " 2>&1";
    CliRun r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

} // namespace

TEST(Cli, UsageAndInputErrors) {
    const CliRun none = cli("");
    EXPECT_EQ(none.code, 1);
    EXPECT_NE(none.out.find("Usage"), std::string::npos);
    const CliRun flag = cli("draw --algo dimflux --no-such-flag " + kData + "/dwarf.cxt");
    EXPECT_EQ(flag.code, 1);
    EXPECT_NE(flag.out.find("Usage"), std::string::npos);
    EXPECT_EQ(cli("draw --algo nope " + kData + "/dwarf.cxt").code, 1);
    EXPECT_EQ(cli("lattice " + temp_path("does-not-exist.cxt")).code, 1);
    EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, DrawWritesALayout) {
    const std::string out = temp_path("draw.json");
    std::filesystem::remove(out);
    const CliRun r = cli("draw --algo dimflux " + kData + "/dwarf.cxt -o " + out);
    EXPECT_EQ(r.code, 0) << r.out;
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    const Layout l = load_layout(out, lat);
    EXPECT_TRUE(validate_line_diagram(lat, l).valid());
    EXPECT_TRUE(is_additive(build_srm(lat, RepresentationKind::DoublyAdditive), l, 1e-6).additive);
}

TEST(Cli, CheckAdditiveReportsTheHandDrawnDiagram) {
    const CliRun r = cli("check-additive " + kData + "/dwarf-hand.json " + kData + "/dwarf.cxt");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("not additive"), std::string::npos);
    EXPECT_NE(r.out.find("residual"), std::string::npos);
}

TEST(Cli, ProjectSnapMetricsRenderAndLattice) {
    const std::string ctx = kData + "/dwarf.cxt";
    const std::string proj = temp_path("proj.json"), snapped = temp_path("snap.json");
    EXPECT_EQ(cli("project " + kData + "/dwarf-hand.json " + ctx + " -o " + proj).code, 0);
    const CliRun add = cli("check-additive " + proj + " " + ctx);
    EXPECT_EQ(add.out.rfind("additive", 0), 0u) << add.out;

    EXPECT_EQ(cli("snap --grid 0.5 " + proj + " " + ctx + " -o " + snapped).code, 0);
    const ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    const Layout s = load_layout(snapped, lat);
    for (double v : s.raw()) EXPECT_NEAR(v * 2, std::round(v * 2), 1e-9);

    const CliRun m = cli("metrics " + proj + " " + ctx + " --reference " + kData + "/dwarf-hand.json");
    EXPECT_EQ(m.code, 0);
    const Json mj = Json::parse(m.out);
    EXPECT_TRUE(mj["additive"].get<bool>());
    EXPECT_GT(mj["metrics"]["referenceDistance"].get<double>(), 0.0);

    const CliRun svg = cli("render " + proj + " " + ctx + " -f svg");
    EXPECT_EQ(svg.code, 0);
    EXPECT_EQ(svg.out.rfind("<svg", 0), 0u);

    const CliRun l = cli("lattice " + ctx);
    EXPECT_EQ(l.code, 0);
    EXPECT_EQ(Json::parse(l.out)["concepts"].size(), 11u);
}

TEST(Cli, BudgetExhaustionExitsTwo) {
    const std::string fm3 = temp_path("fm3.cxt");
    write_file(fm3, to_cxt(contexts::fm3()));
    const CliRun r = cli("draw --algo dimdraw --budget 1 " + fm3 + " -o " + temp_path("fm3.json"));
    EXPECT_EQ(r.code, 2) << r.out;
}

TEST(Cli, ConfigFlagWinsOverEnvironment) {
    const std::string bad = temp_path("bad-config.json"), good = temp_path("good-config.json");
    write_file(bad, R"({"no_such_key": 1})");
    write_file(good, R"({"max_iterations": 3000})");
    const std::string args = "draw --algo dimflux " + kData + "/dwarf.cxt -o " + temp_path("cfg.json");
    EXPECT_EQ(cli(args, "LATFLUX_CONFIG=" + bad).code, 1);
    EXPECT_EQ(cli("--config " + good + " " + args, "LATFLUX_CONFIG=" + bad).code, 0);
}

#endif
