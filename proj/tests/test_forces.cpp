#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <latflux/forces.hpp>
#include <latflux/named.hpp>

#include "force_oracles.hpp"

using namespace latflux;
using namespace oracles;

namespace {

struct Dwarf : ::testing::Test {
    ConceptLattice lat = compute_lattice(contexts::dwarf_planets());
    AdditiveBasis basis = build_srm(lat, RepresentationKind::DoublyAdditive);
};

} // namespace

TEST(ConflictDistance, ThreeCases) {
    EXPECT_DOUBLE_EQ(conflict_distance({0, 1}, {-1, 0}, {1, 0}), 1.0);
    EXPECT_DOUBLE_EQ(conflict_distance({-2, 0}, {-1, 0}, {1, 0}), 1.0);
    EXPECT_EQ(conflict_case({-2, 0}, {-1, 0}, {1, 0}), ConflictCase::BelowLower);
    EXPECT_EQ(conflict_case({3, 0}, {-1, 0}, {1, 0}), ConflictCase::AboveUpper);
    EXPECT_NEAR(conflict_distance({0.3, 0.4}, {0, 0}, {1, 0}), 0.4, 1e-12);
    EXPECT_THROW(conflict_distance({0, 1}, {1, 1}, {1, 1}), DegenerateEdge);
}

TEST(ConflictDistance, AgreesWithSampledSegment) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 w{u(rng), u(rng)}, w1{u(rng), u(rng)}, w2{u(rng), u(rng)};
        if (norm(w2 - w1) < 1e-3) continue;
        double best = 1e300;
        for (int k = 0; k <= 1000; ++k) best = std::min(best, norm(w1 + (k / 1000.0) * (w2 - w1) - w));
        EXPECT_NEAR(conflict_distance(w, w1, w2), best, 1e-2 * norm(w2 - w1) + 1e-9);
        EXPECT_LE(conflict_distance(w, w1, w2), best + 1e-12);
    }
}

TEST(SupInf, ComparableAndContranominal) {
    const auto lat = compute_lattice(contexts::contranominal(3));
    const auto basis = build_srm(lat, RepresentationKind::DoublyAdditive);
    // attributes 0 and 1 of the 3x3 contranominal scale
    EXPECT_DOUBLE_EQ(sup_inf_distance(lat, basis.elements[3], basis.elements[4]).value, 1.0);

    const auto chain = compute_lattice(contexts::chain(3));
    const auto cb = build_srm(chain, RepresentationKind::DoublyAdditive);
    EXPECT_DOUBLE_EQ(sup_inf_distance(chain, cb.elements[3], cb.elements[4]).value, 0.0);
}

TEST_F(Dwarf, SupInfOfTwoAttributes) {
    // mu(Non-Spherical) and mu(Atmosphere) are incomparable; the closure of
    // their intents is {Non-Spherical, Atmosphere}, the intersection is empty
    const auto si = sup_inf_distance(lat, basis.elements[5], basis.elements[6]);
    EXPECT_DOUBLE_EQ(si.value, 1.0);
    EXPECT_FALSE(si.clamped);
    for (std::size_t a = 0; a < 9; ++a)
        for (std::size_t b = 0; b < 9; ++b) {
            if (a == b) continue;
            const auto s = sup_inf_distance(lat, basis.elements[a], basis.elements[b]);
            EXPECT_GE(s.value, 0.0);
            EXPECT_EQ(s.value, sup_inf_distance(lat, basis.elements[b], basis.elements[a]).value);
        }
}

TEST(PlanarityEnhancer, TrivialAndSpring) {
    const auto one = compute_lattice(FormalContext({}, {"m"}, std::vector<std::vector<bool>>{}));
    const auto b1 = build_srm(one, RepresentationKind::DoublyAdditive);
    const auto r1 = planarity_enhancer(one, b1, ForceMode::AttributeAdditive, {});
    EXPECT_EQ(r1.order, std::vector<std::size_t>{0});

    const auto lat = compute_lattice(contexts::b2());
    const auto basis = build_srm(lat, RepresentationKind::DoublyAdditive);
    const auto r = planarity_enhancer(lat, basis, ForceMode::AttributeAdditive, {});
    ASSERT_EQ(r.points.size(), 2U);
    EXPECT_NEAR(norm(r.points[0] - r.points[1]), 1.0, 1e-3);
}

TEST_F(Dwarf, PlanarityEnhancerLowersEnergy) {
    const auto r = planarity_enhancer(lat, basis, ForceMode::DoublyAdditive, {});
    EXPECT_EQ(r.order.size(), 9U);
    EXPECT_LE(r.final_energy, r.initial_energy);
    std::vector<std::size_t> sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Initialize, ParabolaPlacement) {
    const auto one = compute_lattice(FormalContext({}, {"m"}, std::vector<std::vector<bool>>{}));
    const auto b1 = build_srm(one, RepresentationKind::DoublyAdditive);
    const auto o1 = planarity_enhancer(one, b1, ForceMode::DoublyAdditive, {});
    const auto v1 = oriented(b1, initialize_vectors(one, b1, o1, ForceMode::DoublyAdditive, {}));
    ASSERT_EQ(v1.vectors.size(), 1U);
    EXPECT_NEAR(v1.vectors[0].x, 0.0, 1e-12);
    EXPECT_NEAR(v1.vectors[0].y, -1.75, 1e-12);

    const auto lat = compute_lattice(contexts::b2());
    const auto basis = build_srm(lat, RepresentationKind::DoublyAdditive);
    const auto order = planarity_enhancer(lat, basis, ForceMode::AttributeAdditive, {});
    const auto v = oriented(basis, initialize_vectors(lat, basis, order, ForceMode::AttributeAdditive, {}));
    EXPECT_NEAR(std::abs(v.vectors[2].x), 0.9, 1e-12);
    EXPECT_NEAR(v.vectors[2].x, -v.vectors[3].x, 1e-12);
    EXPECT_NEAR(v.vectors[2].y, -1.8229, 1e-12);
    EXPECT_NEAR(v.vectors[3].y, -1.8229, 1e-12);
    // objects do not take part in attribute mode
    EXPECT_EQ(norm(v.vectors[0]), 0.0);
    EXPECT_EQ(norm(v.vectors[1]), 0.0);
}

TEST(Initialize, ChainDecompositionTakesTheMeanAbove) {
    const FormalContext ctx({"g1", "g2", "g3"}, {"m1", "m2", "m3"},
                            {{true, false, false}, {false, true, false}, {true, true, true}});
    const auto lat = compute_lattice(ctx);
    const auto basis = build_srm(lat, RepresentationKind::AttributeAdditive);
    const auto order = planarity_enhancer(lat, basis, ForceMode::AttributeAdditive, {});
    const auto v = oriented(basis, initialize_vectors(lat, basis, order, ForceMode::AttributeAdditive, {}));
    EXPECT_NEAR(v.vectors[2].x, 0.0, 1e-12);
    EXPECT_NEAR(v.vectors[2].y, v.vectors[0].y, 1e-12);
    EXPECT_NEAR(v.vectors[0].x, -v.vectors[1].x, 1e-12);
}

TEST_F(Dwarf, InitialVectorsPointIntoTheirHalfPlanes) {
    const auto order = planarity_enhancer(lat, basis, ForceMode::DoublyAdditive, {});
    const auto v = initialize_vectors(lat, basis, order, ForceMode::DoublyAdditive, {});
    for (auto vec : v.vectors) EXPECT_GT(vec.y, 0.0);
    EXPECT_TRUE(validate_vector_cone(lat, basis, v));
}

TEST(Energies, SmallConfigurations) {
    const auto two = compute_lattice(contexts::chain(1));
    Layout l2(2);
    l2.set(0, {0, 2});
    EXPECT_EQ(repulsive_energy(two, l2), 0.0);
    EXPECT_DOUBLE_EQ(attractive_energy(two, l2), 4.0);
    EXPECT_EQ(attractive_energy(two, Layout(2)), 0.0);

    const auto three = compute_lattice(contexts::chain(2));
    Layout l3(3);
    l3.set(0, {0, 1});
    l3.set(1, {1, 0});
    l3.set(2, {-1, 0});
    // top against the edge (-1,0)-(1,0) contributes 1; the bottom sees the
    // upper edge at distance sqrt(2)
    EXPECT_NEAR(repulsive_energy(three, l3), 1.0 + 1.0 / std::sqrt(2.0), 1e-12);

    Layout clash(3);
    clash.set(0, {0, 2});
    clash.set(1, {0, 1});
    clash.set(2, {0, 1.5});
    EXPECT_THROW(repulsive_energy(three, clash), SingularConfiguration);
}

TEST(Gravity, SafeZoneAndWrongHalfPlane) {
    const double phi0 = std::numbers::pi / 4; // |M| = 3
    Vec2 g{1, 1};
    // attribute drawn straight down is straight up in the REP convention
    EXPECT_EQ(gravity_term({0, 1}, phi0, &g), 0.0);
    EXPECT_EQ(norm(g), 0.0);
    EXPECT_DOUBLE_EQ(gravity_term({1, -0.5}, phi0, &g), 0.25);
    EXPECT_DOUBLE_EQ(-g.x, 0.0);
    EXPECT_DOUBLE_EQ(-g.y, 1.0);
    EXPECT_EQ(gravity_term({0, 0}, phi0, &g), 0.0);
    EXPECT_EQ(norm(g), 0.0);

    // just right of the zone: the force turns the vector toward the zone
    const double phi = phi0 - 0.05;
    const Vec2 v{std::cos(phi), std::sin(phi)};
    const double e = gravity_term(v, phi0, &g);
    EXPECT_GT(e, 0.0);
    const Vec2 force = -g;
    EXPECT_GT(cross(v, force), 0.0); // counter-clockwise
    EXPECT_NEAR(dot(v, force), 0.0, 1e-12);
    const double left = gravity_term({-v.x, v.y}, phi0, &g);
    EXPECT_NEAR(left, e, 1e-12);
    EXPECT_LT(cross({-v.x, v.y}, -g), 0.0);
}

TEST(Gravity, ZeroStrictlyInsideTheZone) {
    std::mt19937 rng(4);
    for (int n : {1, 2, 3, 5, 9}) {
        const double phi0 = std::numbers::pi / (n + 1);
        std::uniform_real_distribution<double> a(phi0 + 1e-9, std::numbers::pi - phi0 - 1e-9), r(0.1, 5.0);
        for (int k = 0; k < 100; ++k) {
            const double t = a(rng), rad = r(rng);
            Vec2 g{1, 1};
            EXPECT_EQ(gravity_term({rad * std::cos(t), rad * std::sin(t)}, phi0, &g), 0.0);
            EXPECT_EQ(norm(g), 0.0);
        }
    }
}

TEST_F(Dwarf, RepulsiveGradientMatchesFiniteDifferences) {
    std::mt19937 rng(100);
    int states = 0;
    while (states < 200) {
        const auto v = random_vectors(rng, 9);
        if (!far_from_case_boundaries(lat, positions_from_vectors(basis, v))) continue;
        ++states;
        std::vector<Vec2> g;
        repulsive_energy(lat, positions_from_vectors(basis, v), &g);
        const TermFn e = [&](const ElementVectors& x) { return repulsive_energy(lat, positions_from_vectors(basis, x)); };
        ASSERT_LE(gradient_error(e, to_element_gradient(basis, g), v), 1e-3) << "state " << states;
    }
}

TEST_F(Dwarf, AttractiveGradientMatchesFiniteDifferences) {
    std::mt19937 rng(101);
    for (int states = 0; states < 200; ++states) {
        const auto v = random_vectors(rng, 9);
        std::vector<Vec2> g;
        attractive_energy(lat, positions_from_vectors(basis, v), &g);
        const TermFn e = [&](const ElementVectors& x) { return attractive_energy(lat, positions_from_vectors(basis, x)); };
        ASSERT_LE(gradient_error(e, to_element_gradient(basis, g), v), 1e-6) << "state " << states;
    }
}

TEST_F(Dwarf, GravitationalGradientMatchesFiniteDifferences) {
    std::mt19937 rng(102);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), rad(0.3, 3.0);
    int states = 0;
    int angular = 0;
    while (states < 200) {
        ElementVectors v;
        bool ok = true;
        for (std::size_t j = 0; j < 9; ++j) {
            const double t = ang(rng), r = rad(rng);
            const double phi0 = safe_zone_angle(lat.context(), basis.elements[j]);
            // away from the half-plane switch and the zone edges
            if (std::abs(std::sin(t)) < 0.05 || std::abs(t - phi0) < 1e-3 ||
                std::abs(t - (std::numbers::pi - phi0)) < 1e-3)
                ok = false;
            v.vectors.push_back({r * std::cos(t), r * std::sin(t)});
        }
        if (!ok) continue;
        ++states;
        std::vector<Vec2> g;
        if (gravitational_energy(basis, lat.context(), v, ForceMode::DoublyAdditive, &g) > 0.0) ++angular;
        const TermFn e = [&](const ElementVectors& x) {
            return gravitational_energy(basis, lat.context(), x, ForceMode::DoublyAdditive);
        };
        if (std::all_of(g.begin(), g.end(), [](Vec2 x) { return norm(x) == 0.0; })) continue;
        ASSERT_LE(gradient_error(e, g, v), 1e-3) << "state " << states;
    }
    EXPECT_GT(angular, 100);
}

TEST_F(Dwarf, EnergiesAreNonNegativeAndTranslationInvariant) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> shift(-10, 10);
    for (int k = 0; k < 50; ++k) {
        const auto v = random_vectors(rng, 9);
        const Layout l = positions_from_vectors(basis, v);
        if (!far_from_case_boundaries(lat, l)) continue;
        const Layout moved = translate(l, {shift(rng), shift(rng)});
        EXPECT_GE(repulsive_energy(lat, l), 0.0);
        EXPECT_GE(attractive_energy(lat, l), 0.0);
        EXPECT_GE(gravitational_energy(basis, lat.context(), v, ForceMode::DoublyAdditive), 0.0);
        EXPECT_NEAR(repulsive_energy(lat, moved), repulsive_energy(lat, l), 1e-9 * repulsive_energy(lat, l));
        EXPECT_NEAR(attractive_energy(lat, moved), attractive_energy(lat, l), 1e-9 * attractive_energy(lat, l));
    }
}

TEST_F(Dwarf, AttributeModeLeavesObjectsAlone) {
    std::mt19937 rng(8);
    auto v = random_vectors(rng, 9);
    for (std::size_t j = 0; j < 5; ++j) v.vectors[j] = {};
    const auto ev = evaluate_forces(lat, basis, v, ForceMode::AttributeAdditive, {});
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(norm(ev.force[j]), 0.0);
    bool any = false;
    for (std::size_t j = 5; j < 9; ++j) any = any || norm(ev.force[j]) > 0.0;
    EXPECT_TRUE(any);
}

TEST(Optimize, ZeroForceStartReturnsImmediately) {
    const auto lat = compute_lattice(FormalContext({"g"}, {"m"}, {{false}}));
    const auto basis = build_srm(lat, RepresentationKind::DoublyAdditive);
    const auto r = optimize(lat, basis, ElementVectors{std::vector<Vec2>(2), {}}, ForceMode::DoublyAdditive, {});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0U);
}

TEST(Optimize, TwoChainConvergesToAValidDiagram) {
    const auto lat = compute_lattice(FormalContext({"g"}, {"m"}, {{false}}));
    const auto basis = build_srm(lat, RepresentationKind::DoublyAdditive);
    const auto order = planarity_enhancer(lat, basis, ForceMode::DoublyAdditive, {});
    const auto start = initialize_vectors(lat, basis, order, ForceMode::DoublyAdditive, {});
    const auto r = optimize(lat, basis, start, ForceMode::DoublyAdditive, {});
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(validate_line_diagram(lat, r.layout, 0.0).covers_increasing);
}

TEST_F(Dwarf, OptimizeImprovesConflictDistance) {
    const ForceConfig cfg;
    const auto order = planarity_enhancer(lat, basis, ForceMode::DoublyAdditive, cfg);
    const auto start = initialize_vectors(lat, basis, order, ForceMode::DoublyAdditive, cfg);
    const auto before = validate_line_diagram(lat, positions_from_vectors(basis, start));
    const auto r = optimize(lat, basis, start, ForceMode::DoublyAdditive, cfg);
    const auto after = validate_line_diagram(lat, r.layout);
    EXPECT_TRUE(after.valid());
    // the attractive force shrinks the whole diagram, so compare the
    // clearance relative to the diagram height
    const double h0 = bounds(positions_from_vectors(basis, start)).height();
    const double h1 = bounds(r.layout).height();
    EXPECT_GT(after.min_conflict_distance / h1, before.min_conflict_distance / h0);
    ASSERT_FALSE(r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        EXPECT_LE(r.trace[i].energy.total(cfg), r.trace[i - 1].energy.total(cfg) + 1e-12);
    EXPECT_TRUE(is_additive(basis, r.layout, 1e-6).additive);

    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "iteration,E_rep,E_att,E_grav,max_force");
}

TEST(ForceConfigCheck, RejectsNonPositiveValues) {
    ForceConfig cfg;
    cfg.initial_step = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.max_iterations = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
