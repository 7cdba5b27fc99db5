#pragma once

// Level-1 model: a GWR over trip origin points (km) whose neurons are the
// city's regions. Region ids are the network's neuron ids; with neuron death
// disabled they are dense and insertion ordered, so id i is also the index of
// region i in every density vector.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citygwr/days.hpp"
#include "citygwr/gwr.hpp"
#include "citygwr/trips.hpp"
#include "citygwr/voronoi.hpp"

namespace citygwr {

struct RegionAssignment {
    std::string trip_id;
    NeuronId region = 0;    ///< BMU before this step's update
    double distance = 0.0;  ///< squared km
    double activity = 1.0;
};

struct RegionCreation {
    std::uint64_t step = 0;  ///< step_count after the creating input
    NeuronId id = 0;
    double bmu_distance = 0.0;  ///< 0 for the two seeds
    bool seed = false;

    friend bool operator==(const RegionCreation&, const RegionCreation&) = default;
};

struct RegionObservation {
    RegionAssignment assignment;
    std::optional<NeuronId> created;
};

class RegionModel {
public:
    /// Throws ConfigError when neuron death is enabled (region ids must stay
    /// dense) or the parameters are otherwise invalid.
    explicit RegionModel(Hyperparameters params = Hyperparameters::region_level());

    /// Rebuilds a model around an existing two-dimensional network.
    static RegionModel from_parts(Network net, std::vector<RegionCreation> log);

    RegionObservation observe_origin(const Trajectory& trip);
    RegionObservation observe_point(std::string trip_id, PlanarPoint origin);

    const Network& net() const { return net_; }
    std::size_t region_count() const { return net_.size(); }
    const std::vector<RegionCreation>& creation_log() const { return log_; }

    friend bool operator==(const RegionModel&, const RegionModel&) = default;

private:
    explicit RegionModel(Network net);
    Network net_;
    std::vector<RegionCreation> log_;
};

struct DailyDensityVector {
    DayKey day;
    std::vector<double> densities;  ///< proportions indexed by region id
    std::uint64_t trip_count = 0;
};

/// Share of the day's trips that started in each region. The vector has one
/// entry per region alive at the end of the day and sums to exactly 1.
/// Throws EmptyDayError when there are no assignments.
DailyDensityVector density_vector(DayKey day, std::span<const RegionAssignment> assignments,
                                  const RegionModel& model);

/// FeatureCollection of region cells in WGS84 with properties
/// {region_id, weight_km, eta, creation_step}.
nlohmann::json regions_geojson(const RegionModel& model, const VoronoiPartition& partition,
                               const UtmProjection& projection);

/// GeoJSON Polygon geometry (closed ring, lon/lat) of a planar cell.
nlohmann::json polygon_geometry(const std::vector<PlanarPoint>& polygon,
                                const UtmProjection& projection);

}  // namespace citygwr
