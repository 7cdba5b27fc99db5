#pragma once

// Level-2 model: a GWR over daily density vectors. Its input dimension tracks
// the region count of the level-1 model; each new region appends a zero
// coordinate to every stored prototype before the next day is observed.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citygwr/gwr.hpp"
#include "citygwr/region_map.hpp"

namespace citygwr {

struct ActivityRecord {
    DayKey day;
    double activity = 1.0;  ///< exp(-distance)
    NeuronId bmu = 0;
    double distance = 0.0;
    StepEvent event = StepEvent::Initializing;
    std::optional<NeuronId> created;
    std::uint64_t trip_count = 0;
    std::vector<double> observed;  ///< the day's density vector x'
    std::vector<double> expected;  ///< BMU prototype before this day's update

    friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

struct Prototype {
    NeuronId id;
    std::vector<double> weight;
    double habituation;
};

class CityModel {
public:
    explicit CityModel(Hyperparameters params = Hyperparameters::city_level());

    /// Rebuilds a model from a network (nullopt before the first region) and
    /// its activity series.
    static CityModel from_parts(Hyperparameters params, std::optional<Network> net,
                                std::vector<ActivityRecord> series);

    /// Appends a zero coordinate to every prototype.
    void on_region_created();

    /// One learning step on the day's density vector. Throws
    /// PipelineOrderError when its length differs from input_dim().
    const ActivityRecord& observe_day(const DailyDensityVector& x);

    std::size_t input_dim() const { return dim_; }
    const Hyperparameters& params() const { return params_; }
    const std::optional<Network>& net() const { return net_; }
    const std::vector<ActivityRecord>& series() const { return series_; }
    std::vector<Prototype> prototypes() const;

private:
    Hyperparameters params_;
    std::size_t dim_ = 0;
    std::optional<Network> net_;
    std::vector<ActivityRecord> series_;
};

nlohmann::json activity_record_to_json(const ActivityRecord& r);
ActivityRecord activity_record_from_json(const nlohmann::json& j);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// CSV with header date,activity,bmu_id,trip_count,event.
void write_activity_csv(std::ostream& out, const std::vector<ActivityRecord>& series);

/// {"prototypes": [{id, eta, clamped, min_weight, weights: {region id: w}}]}.
/// Negative entries are clamped to 0 for rendering and the prototype is marked
/// clamped; min_weight keeps the raw minimum for auditing.
nlohmann::json prototypes_json(const std::vector<Prototype>& prototypes);

}  // namespace citygwr
