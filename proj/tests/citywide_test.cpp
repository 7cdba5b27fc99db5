#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "citygwr/citywide.hpp"
#include "citygwr/errors.hpp"

namespace citygwr {
namespace {

DailyDensityVector day_vec(int index, std::vector<double> x, std::uint64_t trips = 100) {
    return {DayKey{16000 + index}, std::move(x), trips};
}

CityModel with_regions(std::size_t n) {
    CityModel m;
    for (std::size_t i = 0; i < n; ++i) m.on_region_created();
    return m;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

TEST(CityModel, UsesCityParameters) {
    const CityModel m;
    EXPECT_EQ(m.params().activity_threshold, 1.0);
    EXPECT_EQ(m.params().habit_tau_bmu, 0.3);
    EXPECT_EQ(m.params().habit_tau_neighbor, 0.1);
    EXPECT_TRUE(m.params().neuron_death_enabled);
    EXPECT_EQ(m.input_dim(), 0u);
}

TEST(CityModel, DayBeforeAnyRegionIsAnOrderingError) {
    CityModel m;
    EXPECT_THROW(m.observe_day(day_vec(0, {1.0})), PipelineOrderError);
}

TEST(CityModel, DimensionMismatchIsAnOrderingError) {
    CityModel m = with_regions(3);
    EXPECT_THROW(m.observe_day(day_vec(0, {0.5, 0.5})), PipelineOrderError);
    EXPECT_THROW(m.observe_day(day_vec(0, {0.25, 0.25, 0.25, 0.25})), PipelineOrderError);
    EXPECT_NO_THROW(m.observe_day(day_vec(0, {0.5, 0.25, 0.25})));
}

TEST(CityModel, SeedDaysBecomePrototypes) {
    CityModel m = with_regions(3);
    const std::vector<double> d0{0.5, 0.25, 0.25}, d1{0.2, 0.2, 0.6};
    const auto& r0 = m.observe_day(day_vec(0, d0));
    EXPECT_EQ(r0.event, StepEvent::Initializing);
    EXPECT_EQ(r0.activity, 1.0);
    m.observe_day(day_vec(1, d1));
    const auto protos = m.prototypes();
    ASSERT_EQ(protos.size(), 2u);
    EXPECT_EQ(protos[0].weight, d0);
    EXPECT_EQ(protos[1].weight, d1);
    EXPECT_EQ(m.series().size(), 2u);
}

TEST(CityModel, ExactPrototypeMatchHasFullActivity) {
    CityModel m = with_regions(2);
    m.observe_day(day_vec(0, {0.5, 0.5}));
    m.observe_day(day_vec(1, {0.9, 0.1}));
    const auto& r = m.observe_day(day_vec(2, {0.9, 0.1}));
    EXPECT_EQ(r.activity, 1.0);
    EXPECT_EQ(r.bmu, 1u);
    EXPECT_EQ(r.event, StepEvent::WeightsUpdated);
}

TEST(CityModel, ActivityAndExpectedAreFromThePreUpdatePrototype) {
    CityModel m = with_regions(2);
    m.observe_day(day_vec(0, {0.5, 0.5}));
    m.observe_day(day_vec(1, {0.9, 0.1}));
    const std::vector<double> x{0.8, 0.2};
    const auto before = m.prototypes();
    const auto& r = m.observe_day(day_vec(2, x));
    EXPECT_EQ(r.bmu, 1u);
    EXPECT_EQ(r.expected, before[1].weight);
    EXPECT_EQ(r.observed, x);
    EXPECT_DOUBLE_EQ(r.distance, sq_dist(x, before[1].weight));
    EXPECT_EQ(r.activity, std::exp(-r.distance));
    // eta of a fresh prototype is above f_T, so a' < 1 still only updates.
    EXPECT_EQ(r.event, StepEvent::WeightsUpdated);
}

TEST(CityModel, HabituatedMismatchAlwaysCreates) {
    // a_T' = 1: any imperfect match of a habituated prototype grows.
    CityModel m = with_regions(2);
    m.observe_day(day_vec(0, {0.5, 0.5}));
    m.observe_day(day_vec(1, {0.9, 0.1}));
    for (int i = 0; i < 12; ++i) m.observe_day(day_vec(2 + i, {0.9, 0.1}));
    ASSERT_LT(m.net()->habituation(1), 0.1);
    const auto& r = m.observe_day(day_vec(20, {0.9 - 1e-6, 0.1 + 1e-6}));
    EXPECT_EQ(r.event, StepEvent::NeuronCreated);
    EXPECT_LT(r.activity, 1.0);
    EXPECT_GT(r.activity, 0.999999);
}

TEST(CityModel, RegionGrowthPadsPrototypes) {
    std::vector<NeuronState> ns;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 0.01);
    for (NeuronId i = 0; i < 69; ++i) {
        std::vector<double> w(530);
        for (auto& v : w) v = u(rng);
        ns.push_back({i, w, 0.5});
    }
    Network net = Network::from_state(Hyperparameters::city_level(), 530, ns, {}, 100, 69);
    CityModel m = CityModel::from_parts(Hyperparameters::city_level(), std::move(net), {});
    m.on_region_created();
    const auto protos = m.prototypes();
    ASSERT_EQ(protos.size(), 69u);
    for (const auto& p : protos) {
        ASSERT_EQ(p.weight.size(), 531u);
        EXPECT_EQ(p.weight.back(), 0.0);
    }
    EXPECT_EQ(m.input_dim(), 531u);
}

TEST(CityModel, TwoCreationsInOneDayPadTwice) {
    CityModel m = with_regions(2);
    m.observe_day(day_vec(0, {0.5, 0.5}));
    m.observe_day(day_vec(1, {0.9, 0.1}));
    m.on_region_created();
    m.on_region_created();
    for (const auto& p : m.prototypes()) {
        ASSERT_EQ(p.weight.size(), 4u);
        EXPECT_EQ(p.weight[2], 0.0);
        EXPECT_EQ(p.weight[3], 0.0);
    }
    EXPECT_NO_THROW(m.observe_day(day_vec(2, {0.4, 0.3, 0.2, 0.1})));
}

TEST(CityModel, PaddingKeepsStoredDayActivity) {
    CityModel m = with_regions(3);
    const std::vector<std::vector<double>> days{
        {0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}, {0.45, 0.35, 0.2}, {0.2, 0.1, 0.7}};
    for (std::size_t i = 0; i < days.size(); ++i) m.observe_day(day_vec(int(i), days[i]));
    const Network before = *m.net();
    m.on_region_created();
    for (const auto& d : days) {
        auto padded = d;
        padded.push_back(0.0);
        const auto a = before.find_bmu_pair(d);
        const auto b = m.net()->find_bmu_pair(padded);
        EXPECT_EQ(a.bmu, b.bmu);
        EXPECT_EQ(a.bmu_distance, b.bmu_distance);
        EXPECT_EQ(activity(a.bmu_distance), activity(b.bmu_distance));
    }
}

TEST(CityModel, FrequentPrototypeIsMoreHabituated) {
    CityModel m = with_regions(3);
    const std::vector<double> common{0.6, 0.3, 0.1}, rare{0.1, 0.3, 0.6};
    m.observe_day(day_vec(0, common));
    m.observe_day(day_vec(1, rare));
    int day = 2;
    for (int week = 0; week < 4; ++week) {
        for (int i = 0; i < 6; ++i) m.observe_day(day_vec(day++, common));
        m.observe_day(day_vec(day++, rare));
    }
    // Rank surviving prototypes by how often they were the day's BMU.
    const auto& net = *m.net();
    std::map<NeuronId, int> hits;
    for (const auto& r : m.series()) {
        if (net.contains(r.bmu)) ++hits[r.bmu];
    }
    ASSERT_GE(hits.size(), 2u);
    auto [most, least] = std::minmax_element(
        hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    ASSERT_GT(most->second, least->second);
    EXPECT_LT(net.habituation(most->first), net.habituation(least->first));
}

// A synthetic year with weekday/weekend patterns and an 8-day block in which
// a third of the traffic moves to a single region.
TEST(CityModel, RecoversAfterAnomalyBlock) {
    constexpr std::size_t kRegions = 12;
    std::mt19937_64 rng(17);
    std::vector<double> weekday(kRegions), weekend(kRegions);
    for (std::size_t i = 0; i < kRegions; ++i) {
        weekday[i] = 1.0 + double(i % 4);
        weekend[i] = 1.0 + double((kRegions - i) % 5);
    }
    auto draw = [&](std::vector<double> w, std::size_t trips) {
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        std::vector<double> x(kRegions, 0.0);
        for (std::size_t t = 0; t < trips; ++t) x[pick(rng)] += 1.0;
        for (auto& v : x) v /= double(trips);
        return x;
    };

    CityModel m = with_regions(kRegions);
    constexpr int kBlockStart = 200, kBlockLen = 8;
    for (int d = 0; d < 365; ++d) {
        std::vector<double> w = (d % 7 >= 5) ? weekend : weekday;
        std::vector<double> x = draw(w, 4000);
        if (d >= kBlockStart && d < kBlockStart + kBlockLen) {
            for (auto& v : x) v *= 2.0 / 3.0;
            x[7] += 1.0 / 3.0;
        }
        m.observe_day(day_vec(d, x, 4000));
    }
    const auto& s = m.series();
    ASSERT_EQ(s.size(), 365u);
    double pre = 0, post = 0, block = 0;
    for (int i = 0; i < 7; ++i) {
        pre += s[kBlockStart - 7 + i].activity / 7;
        post += s[kBlockStart + kBlockLen + i].activity / 7;
    }
    for (int i = 0; i < kBlockLen; ++i) block += s[kBlockStart + i].activity / kBlockLen;
    EXPECT_GE(post, 0.98 * pre);
    EXPECT_LT(s[kBlockStart].activity, pre);
    EXPECT_LT(block, post);
}

TEST(ActivityCsv, Format) {
    CityModel m = with_regions(2);
    m.observe_day(day_vec(0, {0.5, 0.5}, 10));
    m.observe_day(day_vec(1, {0.75, 0.25}, 12));
    std::ostringstream out;
    write_activity_csv(out, m.series());
    EXPECT_EQ(out.str(),
              "date,activity,bmu_id,trip_count,event\n"
              "2013-10-22,1,0,10,initializing\n"
              "2013-10-23,1,1,12,initializing\n");
}

TEST(ActivityRecordJson, RoundTrip) {
    CityModel m = with_regions(3);
    m.observe_day(day_vec(0, {0.5, 0.3, 0.2}));
    m.observe_day(day_vec(1, {0.1, 0.2, 0.7}));
    m.observe_day(day_vec(2, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    for (const auto& r : m.series()) {
        const auto back = activity_record_from_json(
            nlohmann::json::parse(activity_record_to_json(r).dump()));
        EXPECT_EQ(back, r);
    }
}

TEST(PrototypesJson, ClampsNegativeEntries) {
    const auto doc = prototypes_json({{4, {0.5, -0.01, 0.51}, 0.3}, {5, {0.2, 0.8}, 1.0}});
    const auto& p = doc["prototypes"];
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0]["id"], 4);
    EXPECT_TRUE(p[0]["clamped"].get<bool>());
    EXPECT_EQ(p[0]["min_weight"], -0.01);
    EXPECT_EQ(p[0]["weights"]["1"], 0.0);
    EXPECT_EQ(p[0]["weights"]["2"], 0.51);
    EXPECT_FALSE(p[1]["clamped"].get<bool>());
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(std::stod(format_double(0.883123456789)), 0.883123456789);
}

}  // namespace
}  // namespace citygwr
