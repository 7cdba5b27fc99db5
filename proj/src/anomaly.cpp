#include "citygwr/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "citygwr/errors.hpp"

namespace citygwr {

void AnomalyPolicy::validate() const {
    if (warmup_days < 0) throw ConfigError("anomaly warmup_days must be >= 0");
    if (window < 7) throw ConfigError("anomaly window must be >= 7 days");
    if (!(mad_multiplier > 0) || !std::isfinite(mad_multiplier)) {
        throw ConfigError("anomaly mad_multiplier must be a positive number");
    }
    if (min_history < 1 || min_history > window) {
        throw ConfigError("anomaly min_history must lie in [1, window]");
    }
    if (!(min_spread >= 0) || !std::isfinite(min_spread)) {
        throw ConfigError("anomaly min_spread must be a non-negative number");
    }
}

const char* to_string(FlagStatus s) {
    switch (s) {
        case FlagStatus::Normal: return "normal";
        case FlagStatus::Flagged: return "flagged";
        case FlagStatus::InsufficientHistory: return "insufficient_history";
    }
    return "unknown";
}

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

DayEvaluation evaluate_day(const AnomalyPolicy& policy, std::span<const double> history,
                           std::span<const bool> flags, double today) {
    if (flags.size() != history.size()) throw InputError("history and flags differ in length");
    DayEvaluation e;
    e.activity = today;

    std::vector<double> window;
    for (std::size_t i = history.size(); i-- > 0 && window.size() < std::size_t(policy.window);) {
        if (!flags[i]) window.push_back(history[i]);
    }
    e.window_used = window.size();
    if (!window.empty()) {
        e.baseline = median(window);
        std::vector<double> dev(window.size());
        for (std::size_t i = 0; i < window.size(); ++i) dev[i] = std::abs(window[i] - e.baseline);
        e.spread = std::max(kMadToSigma * median(std::move(dev)), policy.min_spread);
        e.threshold = e.baseline - policy.mad_multiplier * e.spread;
    }

    const std::size_t day_number = history.size() + 1;
    if (day_number <= std::size_t(policy.warmup_days) ||
        window.size() < std::size_t(policy.min_history)) {
        e.status = FlagStatus::InsufficientHistory;
    } else {
        e.status = today < e.threshold ? FlagStatus::Flagged : FlagStatus::Normal;
    }
    return e;
}

std::vector<DayEvaluation> evaluate_series(const AnomalyPolicy& policy,
                                           std::span<const ActivityRecord> series) {
    std::vector<double> history;
    const auto flags = std::make_unique<bool[]>(series.size());
    std::vector<DayEvaluation> out;
    history.reserve(series.size());
    for (const auto& r : series) {
        const std::span<const bool> f(flags.get(), history.size());
        out.push_back(evaluate_day(policy, history, f, r.activity));
        flags[history.size()] = out.back().flagged();
        history.push_back(r.activity);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Explanations

namespace {

std::optional<PlanarPoint> centroid(const std::vector<PlanarPoint>& poly) {
    if (poly.size() < 3) return std::nullopt;
    const PlanarPoint o = poly.front();
    double a2 = 0, cx = 0, cy = 0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const double ax = poly[i].x - o.x, ay = poly[i].y - o.y;
        const double bx = poly[i + 1].x - o.x, by = poly[i + 1].y - o.y;
        const double cross = ax * by - ay * bx;
        a2 += cross;
        cx += cross * (ax + bx);
        cy += cross * (ay + by);
    }
    if (a2 == 0) return std::nullopt;
    return PlanarPoint{o.x + cx / (3 * a2), o.y + cy / (3 * a2)};
}

}  // namespace

AnomalyReport explain(const ActivityRecord& record, const DayEvaluation& evaluation,
                      const RegionModel& regions, const UtmProjection& projection,
                      std::size_t top_n, const VoronoiPartition* partition) {
    const std::size_t n = regions.region_count();
    if (record.observed.size() > n || record.expected.size() > n) {
        throw InputError("record for " + record.day.to_string() +
                         " has more entries than the region model");
    }
    AnomalyReport rep;
    rep.day = record.day;
    rep.activity = record.activity;
    rep.bmu = record.bmu;
    rep.evaluation = evaluation;
    rep.deviations.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RegionDeviation d;
        d.region = NeuronId(i);
        d.observed = i < record.observed.size() ? record.observed[i] : 0.0;
        d.expected = i < record.expected.size() ? record.expected[i] : 0.0;
        d.deviation = d.observed - d.expected;
        rep.deviations.push_back(d);
    }

    std::vector<const RegionDeviation*> ranked;
    for (const auto& d : rep.deviations) {
        if (d.deviation != 0) ranked.push_back(&d);
    }
    // Equal magnitudes put the surplus first, then the lower id.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) {
        const double ma = std::abs(a->deviation), mb = std::abs(b->deviation);
        if (ma != mb) return ma > mb;
        return a->deviation > b->deviation;
    });
    if (ranked.size() > top_n) ranked.resize(top_n);
    for (const auto* d : ranked) {
        RankedRegion r;
        r.region = d->region;
        r.deviation = d->deviation;
        r.surplus = d->deviation > 0;
        const auto w = regions.net().weight(d->region);
        r.site = {w[0], w[1]};
        r.site_lonlat = projection.inverse(r.site);
        if (partition) {
            if (const auto* cell = partition->find(d->region)) {
                if (auto c = centroid(cell->polygon)) r.centroid = projection.inverse(*c);
            }
        }
        rep.top_regions.push_back(r);
    }
    return rep;
}

nlohmann::json report_to_json(const AnomalyReport& r) {
    nlohmann::json top = nlohmann::json::array();
    for (const auto& t : r.top_regions) {
        nlohmann::json item{{"region_id", t.region},
                            {"deviation", t.deviation},
                            {"sign", t.surplus ? "surplus" : "deficit"},
                            {"weight_km", {t.site.x, t.site.y}},
                            {"site", {t.site_lonlat.lon, t.site_lonlat.lat}}};
        item["centroid"] = t.centroid ? nlohmann::json{t.centroid->lon, t.centroid->lat}
                                      : nlohmann::json(nullptr);
        top.push_back(std::move(item));
    }
    nlohmann::json devs = nlohmann::json::array();
    for (const auto& d : r.deviations) {
        devs.push_back({{"region_id", d.region},
                        {"observed", d.observed},
                        {"expected", d.expected},
                        {"deviation", d.deviation}});
    }
    const auto& e = r.evaluation;
    return {{"day", r.day.to_string()},
            {"activity", r.activity},
            {"bmu", r.bmu},
            {"status", to_string(e.status)},
            {"baseline", e.baseline},
            {"spread", e.spread},
            {"threshold", e.threshold},
            {"window_used", e.window_used},
            {"top_regions", std::move(top)},
            {"deviations", std::move(devs)}};
}

nlohmann::json export_deviation_map(const AnomalyReport& report,
                                    const VoronoiPartition& partition,
                                    const UtmProjection& projection) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& d : report.deviations) {
        const VoronoiCell* cell = partition.find(d.region);
        if (!cell) {
            throw ExportError("deviation map for " + report.day.to_string() + ": region " +
                              std::to_string(d.region) + " has no polygon");
        }
        features.push_back({{"type", "Feature"},
                            {"geometry", polygon_geometry(cell->polygon, projection)},
                            {"properties",
                             {{"region_id", d.region},
                              {"observed", d.observed},
                              {"expected", d.expected},
                              {"deviation", d.deviation}}}});
    }
    return {{"type", "FeatureCollection"},
            {"properties", {{"day", report.day.to_string()}, {"activity", report.activity}}},
            {"features", std::move(features)}};
}

}  // namespace citygwr
