#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "citygwr/errors.hpp"
#include "citygwr/region_map.hpp"
#include "citygwr/voronoi.hpp"

namespace citygwr {
namespace {

// Two trained regions far apart, both habituated below the firing threshold.
RegionModel two_region_model(double eta = 0.05) {
    const auto p = Hyperparameters::region_level();
    Network net = Network::from_state(p, 2, {{0, {0.0, 0.0}, eta}, {1, {10.0, 0.0}, eta}},
                                      {{0, 1, 1}}, 100, 2);
    return RegionModel::from_parts(std::move(net), {{1, 0, 0.0, true}, {2, 1, 0.0, true}});
}

TEST(RegionModel, RejectsNeuronDeath) {
    auto p = Hyperparameters::region_level();
    p.neuron_death_enabled = true;
    EXPECT_THROW(RegionModel{p}, ConfigError);
}

TEST(RegionModel, CloseOriginUpdatesExistingRegion) {
    RegionModel m = two_region_model();
    const auto obs = m.observe_point("a", {0.2, 0.0});
    EXPECT_FALSE(obs.created);
    EXPECT_EQ(obs.assignment.region, 0u);
    EXPECT_NEAR(obs.assignment.distance, 0.04, 1e-12);
    EXPECT_NEAR(obs.assignment.activity, std::exp(-0.04), 1e-12);
    EXPECT_GT(obs.assignment.activity, std::exp(-1.0));
    EXPECT_EQ(m.region_count(), 2u);
}

TEST(RegionModel, FarOriginCreatesRegion) {
    RegionModel m = two_region_model();
    const auto obs = m.observe_point("b", {0.0, 1.5});
    ASSERT_TRUE(obs.created);
    EXPECT_EQ(*obs.created, 2u);
    EXPECT_EQ(obs.assignment.region, 0u);
    EXPECT_NEAR(obs.assignment.activity, std::exp(-2.25), 1e-12);
    ASSERT_EQ(m.creation_log().size(), 3u);
    EXPECT_EQ(m.creation_log().back().id, 2u);
    EXPECT_NEAR(m.creation_log().back().bmu_distance, 2.25, 1e-12);
    EXPECT_FALSE(m.creation_log().back().seed);
}

TEST(RegionModel, FreshRegionIsNotSplit) {
    // eta = 1 is above the firing threshold: even a far origin only trains.
    RegionModel m = two_region_model(1.0);
    EXPECT_FALSE(m.observe_point("c", {0.0, 1.5}).created);
}

TEST(RegionModel, OriginOnNeuron) {
    RegionModel m = two_region_model();
    const auto obs = m.observe_point("d", {10.0, 0.0});
    EXPECT_EQ(obs.assignment.region, 1u);
    EXPECT_EQ(obs.assignment.distance, 0.0);
    EXPECT_EQ(obs.assignment.activity, 1.0);
}

TEST(RegionModel, SeedsAreLoggedAsCreations) {
    RegionModel m;
    Trajectory t;
    t.trip_id = "s0";
    t.points = {{3.0, 4.0}, {9.0, 9.0}};
    const auto first = m.observe_origin(t);
    EXPECT_EQ(first.created, std::optional<NeuronId>(0));
    EXPECT_EQ(first.assignment.region, 0u);
    t.points = {{5.0, 4.0}};
    const auto second = m.observe_origin(t);
    EXPECT_EQ(second.created, std::optional<NeuronId>(1));
    ASSERT_EQ(m.creation_log().size(), 2u);
    EXPECT_TRUE(m.creation_log()[0].seed);
    EXPECT_TRUE(m.creation_log()[1].seed);
}

TEST(RegionModel, NeurogenesisKeepsKilometreSpacing) {
    RegionModel m;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int i = 0; i < 30000; ++i) m.observe_point(std::to_string(i), {u(rng), u(rng)});
    std::size_t non_seed = 0;
    for (const auto& c : m.creation_log()) {
        if (c.seed) continue;
        ++non_seed;
        EXPECT_GT(c.bmu_distance, 1.0) << "region " << c.id;
    }
    EXPECT_GT(non_seed, 50u);
    EXPECT_EQ(m.creation_log().size(), m.region_count());
    for (std::size_t i = 0; i < m.region_count(); ++i) EXPECT_EQ(m.net().ids()[i], i);
}

TEST(RegionModel, DenserClusterGetsMoreRegions) {
    RegionModel m;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 2.0);
    std::bernoulli_distribution dense(10.0 / 11.0);
    const PlanarPoint a{0, 0}, b{40, 0};
    for (int i = 0; i < 22000; ++i) {
        const PlanarPoint c = dense(rng) ? a : b;
        m.observe_point("", {c.x + g(rng), c.y + g(rng)});
    }
    std::size_t near_a = 0, near_b = 0;
    for (NeuronId id : m.net().ids()) {
        const auto w = m.net().weight(id);
        (std::hypot(w[0] - a.x, w[1] - a.y) < std::hypot(w[0] - b.x, w[1] - b.y) ? near_a
                                                                                    : near_b)++;
    }
    EXPECT_GT(near_a, near_b);
}

// ---------------------------------------------------------------------------
// Density vectors

std::vector<RegionAssignment> assign(std::initializer_list<NeuronId> regions) {
    std::vector<RegionAssignment> out;
    for (NeuronId r : regions) out.push_back({"", r, 0.0, 1.0});
    return out;
}

RegionModel model_with(std::size_t n) {
    std::vector<NeuronState> ns;
    for (NeuronId i = 0; i < n; ++i) ns.push_back({i, {double(i) * 5, 0.0}, 1.0});
    return RegionModel::from_parts(
        Network::from_state(Hyperparameters::region_level(), 2, ns, {}, n, NeuronId(n)), {});
}

TEST(DensityVector, Proportions) {
    const auto v = density_vector(DayKey::parse("2014-06-01"), assign({0, 0, 1, 2}),
                                  model_with(3));
    EXPECT_EQ(v.densities, (std::vector<double>{0.5, 0.25, 0.25}));
    EXPECT_EQ(v.trip_count, 4u);
    EXPECT_EQ(v.day.to_string(), "2014-06-01");
}

TEST(DensityVector, OneHot) {
    const auto v = density_vector({}, assign({1, 1, 1}), model_with(3));
    EXPECT_EQ(v.densities, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(DensityVector, EmptyDay) {
    EXPECT_THROW(density_vector({}, {}, model_with(3)), EmptyDayError);
}

TEST(DensityVector, UnknownRegion) {
    EXPECT_THROW(density_vector({}, assign({5}), model_with(3)), InputError);
}

TEST(DensityVector, SumsToExactlyOne) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<NeuronId> region(0, 6);
    std::uniform_int_distribution<int> size(1, 400);
    const RegionModel m = model_with(7);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<RegionAssignment> a(static_cast<std::size_t>(size(rng)));
        for (auto& r : a) r.region = region(rng);
        const auto v = density_vector({}, a, m);
        double sum = 0;
        for (double d : v.densities) {
            EXPECT_GE(d, 0.0);
            sum += d;
        }
        ASSERT_EQ(sum, 1.0) << "trial " << trial;
        std::vector<std::size_t> counts(7, 0);
        for (const auto& r : a) ++counts[r.region];
        for (std::size_t i = 0; i < 7; ++i) {
            EXPECT_NEAR(v.densities[i], double(counts[i]) / double(a.size()), 1e-15);
        }
    }
}

TEST(DensityVector, MidDayCreationReplay) {
    RegionModel m = two_region_model();
    const std::vector<PlanarPoint> day{{0.1, 0}, {9.9, 0}, {0, 1.5}, {0, 1.2}, {0.1, 1.3}};
    std::vector<RegionAssignment> got;
    std::optional<NeuronId> created;
    for (const auto& p : day) {
        // Oracle: the assignment is the nearest live region before the step.
        const auto want = m.net().find_bmu_pair(std::array<double, 2>{p.x, p.y}).bmu;
        auto obs = m.observe_point("", p);
        EXPECT_EQ(obs.assignment.region, want);
        if (obs.created) created = obs.created;
        got.push_back(obs.assignment);
    }
    ASSERT_EQ(created, std::optional<NeuronId>(2));
    const auto v = density_vector({}, got, m);
    ASSERT_EQ(v.densities.size(), 3u);
    // The creating trip belongs to region 0; region 2 only counts the two
    // trips that arrived after it existed.
    EXPECT_DOUBLE_EQ(v.densities[0], 2.0 / 5.0);
    EXPECT_DOUBLE_EQ(v.densities[1], 1.0 / 5.0);
    EXPECT_DOUBLE_EQ(v.densities[2], 2.0 / 5.0);
}

// ---------------------------------------------------------------------------
// Voronoi

NeuronId nearest(const std::vector<Generator>& g, PlanarPoint p) {
    NeuronId best = 0;
    double bd = INFINITY;
    for (const auto& s : g) {
        const double d = (p.x - s.site.x) * (p.x - s.site.x) + (p.y - s.site.y) * (p.y - s.site.y);
        if (d < bd || (d == bd && s.id < best)) {
            bd = d;
            best = s.id;
        }
    }
    return best;
}

TEST(Voronoi, TwoSitesBisector) {
    const auto part = voronoi({{0, {0, 0}}, {1, {1, 0}}}, {-1, -1, 2, 1});
    ASSERT_EQ(part.cells().size(), 2u);
    for (const auto& v : part.cells()[0].polygon) EXPECT_LE(v.x, 0.5);
    for (const auto& v : part.cells()[1].polygon) EXPECT_GE(v.x, 0.5);
    EXPECT_NEAR(polygon_area(part.cells()[0].polygon), 3.0, 1e-12);
    EXPECT_NEAR(polygon_area(part.cells()[1].polygon), 3.0, 1e-12);
    EXPECT_EQ(part.locate({0.5, 0.3}), 0u);
    EXPECT_EQ(part.locate({0.5 + 1e-9, 0.3}), 1u);
}

TEST(Voronoi, CollinearSlabs) {
    const auto part = voronoi({{0, {0, 0}}, {1, {2, 0}}, {2, {4, 0}}}, {-1, -5, 5, 5});
    ASSERT_EQ(part.cells().size(), 3u);
    const double expected_area[] = {2 * 10, 2 * 10, 2 * 10};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(part.cells()[i].polygon.size(), 4u);
        EXPECT_NEAR(polygon_area(part.cells()[i].polygon), expected_area[i], 1e-9);
    }
}

TEST(Voronoi, MembershipMatchesNearestSite) {
    std::mt19937_64 rng(21);
    const BoundingBox box{510, 4530, 560, 4590};
    std::uniform_real_distribution<double> ux(box.min_x, box.max_x), uy(box.min_y, box.max_y);
    std::vector<Generator> gens;
    for (NeuronId i = 0; i < 200; ++i) gens.push_back({i, {ux(rng), uy(rng)}});
    const auto part = voronoi(gens, box);

    double area = 0;
    for (const auto& c : part.cells()) {
        EXPECT_TRUE(convex_contains(c.polygon, c.site, 1e-9)) << c.id;
        EXPECT_GT(polygon_area(c.polygon), 0.0);
        area += polygon_area(c.polygon);
    }
    EXPECT_NEAR(area, box.area(), 1e-6 * box.area());

    for (int k = 0; k < 10000; ++k) {
        const PlanarPoint p{ux(rng), uy(rng)};
        const NeuronId want = nearest(gens, p);
        ASSERT_EQ(part.locate(p), want);
        ASSERT_TRUE(convex_contains(part.find(want)->polygon, p, 1e-9)) << k;
        int inside = 0;
        for (const auto& c : part.cells()) inside += convex_contains(c.polygon, p, -1e-9);
        ASSERT_LE(inside, 1) << k;
    }
}

TEST(Voronoi, DuplicateSitesNamed) {
    try {
        voronoi({{3, {1, 1}}, {5, {2, 2}}, {7, {1, 1}}}, {0, 0, 4, 4});
        FAIL() << "expected DegeneratePartitionError";
    } catch (const DegeneratePartitionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("3"), std::string::npos);
        EXPECT_NE(msg.find("7"), std::string::npos);
    }
}

TEST(Voronoi, Preconditions) {
    EXPECT_THROW(voronoi({{0, {0, 0}}}, {-1, -1, 1, 1}), ConfigError);
    EXPECT_THROW(voronoi({{0, {0, 0}}, {1, {1, 1}}}, {0, 0, 0, 1}), ConfigError);
}

TEST(Voronoi, FromNetwork) {
    const RegionModel m = two_region_model();
    const auto part = voronoi(m.net(), {-5, -5, 15, 5});
    ASSERT_EQ(part.cells().size(), 2u);
    EXPECT_NEAR(polygon_area(part.find(0)->polygon), 100.0, 1e-9);
}

TEST(RegionsGeoJson, FeaturesInLonLat) {
    const GeoFrame frame = GeoFrame::porto();
    std::vector<NeuronState> ns{{0, {525.0, 4555.0}, 0.5}, {1, {535.0, 4560.0}, 0.9}};
    const RegionModel m = RegionModel::from_parts(
        Network::from_state(Hyperparameters::region_level(), 2, ns, {}, 2, 2),
        {{1, 0, 0, true}, {7, 1, 0, true}});
    const auto part = voronoi(m.net(), frame.bbox);
    const auto doc = regions_geojson(m, part, frame.projection);
    EXPECT_EQ(doc["type"], "FeatureCollection");
    ASSERT_EQ(doc["features"].size(), 2u);
    const auto& f = doc["features"][1];
    EXPECT_EQ(f["properties"]["region_id"], 1);
    EXPECT_EQ(f["properties"]["creation_step"], 7);
    EXPECT_EQ(f["properties"]["eta"], 0.9);
    const auto& ring = f["geometry"]["coordinates"][0];
    EXPECT_EQ(ring.front(), ring.back());
    for (const auto& c : ring) {
        EXPECT_GT(c[0].get<double>(), -8.9);
        EXPECT_LT(c[0].get<double>(), -8.2);
        EXPECT_GT(c[1].get<double>(), 40.9);
        EXPECT_LT(c[1].get<double>(), 41.5);
    }
    EXPECT_EQ(doc.dump(), regions_geojson(m, part, frame.projection).dump());
}

}  // namespace
}  // namespace citygwr
