#include "citygwr/region_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "citygwr/errors.hpp"

namespace citygwr {

namespace {

Network checked_network(Hyperparameters params) {
    if (params.neuron_death_enabled) {
        throw ConfigError("region network must run with neuron death disabled");
    }
    return Network(params, 2);
}

}  // namespace

RegionModel::RegionModel(Hyperparameters params) : net_(checked_network(params)) {}

RegionModel::RegionModel(Network net) : net_(std::move(net)) {}

RegionModel RegionModel::from_parts(Network net, std::vector<RegionCreation> log) {
    if (net.params().neuron_death_enabled) {
        throw ConfigError("region network must run with neuron death disabled");
    }
    if (net.input_dim() != 2) throw InputError("region network must be two-dimensional");
    RegionModel m(std::move(net));
    m.log_ = std::move(log);
    return m;
}

RegionObservation RegionModel::observe_origin(const Trajectory& trip) {
    return observe_point(trip.trip_id, trip.origin());
}

RegionObservation RegionModel::observe_point(std::string trip_id, PlanarPoint origin) {
    const std::array<double, 2> x{origin.x, origin.y};
    const StepOutcome out = net_.train_step(x);
    RegionObservation obs;
    obs.assignment = {std::move(trip_id), out.bmu, out.distance, out.activity};
    if (out.created) {
        obs.created = out.created;
        log_.push_back({net_.step_count(), *out.created, out.distance,
                        out.event == StepEvent::Initializing});
    }
    return obs;
}

DailyDensityVector density_vector(DayKey day, std::span<const RegionAssignment> assignments,
                                  const RegionModel& model) {
    if (assignments.empty()) {
        throw EmptyDayError("day " + day.to_string() + " has no trips");
    }
    const auto& ids = model.net().ids();
    std::vector<std::uint64_t> counts(ids.size(), 0);
    for (const auto& a : assignments) {
        if (a.region >= ids.size() || ids[a.region] != a.region) {
            throw InputError("assignment to unknown region " + std::to_string(a.region));
        }
        ++counts[a.region];
    }

    DailyDensityVector v{day, std::vector<double>(ids.size(), 0.0), assignments.size()};
    const double total = static_cast<double>(assignments.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        v.densities[i] = static_cast<double>(counts[i]) / total;
    }
    // Push the rounding residue into one entry, largest first, until the
    // left-to-right sum is exactly 1. Intermediate rounding can make 1
    // unreachable through a given entry, hence the fallbacks.
    auto sum = [&] {
        double s = 0;
        for (double d : v.densities) s += d;
        return s;
    };
    if (sum() == 1.0) return v;
    std::vector<std::size_t> order(counts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
    for (std::size_t k : order) {
        if (counts[k] == 0) break;
        const double original = v.densities[k];
        v.densities[k] += 1.0 - sum();
        double s = sum();
        // The sum is monotone in each entry; walk toward 1 ulp by ulp.
        for (int step = 0; step < 16 && s != 1.0; ++step) {
            v.densities[k] = std::nextafter(v.densities[k], s > 1.0 ? 0.0 : 2.0);
            const double next = sum();
            if ((next > 1.0) != (s > 1.0) && next != 1.0) break;  // stepped over 1
            s = next;
        }
        if (s == 1.0) return v;
        v.densities[k] = original;
    }
    return v;
}

nlohmann::json polygon_geometry(const std::vector<PlanarPoint>& polygon,
                                const UtmProjection& projection) {
    nlohmann::json ring = nlohmann::json::array();
    for (const auto& p : polygon) {
        const LonLat g = projection.inverse(p);
        ring.push_back({g.lon, g.lat});
    }
    if (!polygon.empty()) ring.push_back(ring.front());
    return {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}};
}

nlohmann::json regions_geojson(const RegionModel& model, const VoronoiPartition& partition,
                               const UtmProjection& projection) {
    std::vector<std::uint64_t> created_at(model.net().next_id(), 0);
    for (const auto& c : model.creation_log()) {
        if (c.id < created_at.size()) created_at[c.id] = c.step;
    }
    nlohmann::json features = nlohmann::json::array();
    for (const auto& cell : partition.cells()) {
        if (!model.net().contains(cell.id)) {
            throw ExportError("partition cell " + std::to_string(cell.id) +
                              " has no region in the model");
        }
        const auto w = model.net().weight(cell.id);
        const LonLat site = projection.inverse({w[0], w[1]});
        features.push_back({
            {"type", "Feature"},
            {"geometry", polygon_geometry(cell.polygon, projection)},
            {"properties",
             {{"region_id", cell.id},
              {"weight_km", {w[0], w[1]}},
              {"site", {site.lon, site.lat}},
              {"eta", model.net().habituation(cell.id)},
              {"creation_step", created_at[cell.id]}}},
        });
    }
    return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace citygwr
