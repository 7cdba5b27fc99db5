#pragma once

// Robust drop detector over the daily activity series and per-region
// explanations of a day (observed density minus the matched prototype).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citygwr/citywide.hpp"
#include "citygwr/region_map.hpp"
#include "citygwr/voronoi.hpp"

namespace citygwr {

inline constexpr double kMadToSigma = 1.4826;

struct AnomalyPolicy {
    int warmup_days = 30;
    int window = 28;
    double mad_multiplier = 3.0;
    int min_history = 28;
    /// Lower bound on the spread, in activity units. Keeps an almost constant
    /// series from flagging differences far below any practical meaning.
    double min_spread = 0.002;

    /// Throws ConfigError.
    void validate() const;
    friend bool operator==(const AnomalyPolicy&, const AnomalyPolicy&) = default;
};

enum class FlagStatus { Normal, Flagged, InsufficientHistory };
const char* to_string(FlagStatus s);

struct DayEvaluation {
    FlagStatus status = FlagStatus::InsufficientHistory;
    double activity = 1.0;
    double baseline = 0.0;   ///< median of the trailing window
    double spread = 0.0;     ///< MAD * 1.4826 over the same window, at least min_spread
    double threshold = 0.0;  ///< baseline - k * spread
    std::size_t window_used = 0;

    bool flagged() const { return status == FlagStatus::Flagged; }
};

/// Evaluates today's activity against the trailing `window` unflagged days of
/// `history` (day order; flags[i] belongs to history[i]). Today is day number
/// history.size() + 1; days up to warmup_days are never flagged.
DayEvaluation evaluate_day(const AnomalyPolicy& policy, std::span<const double> history,
                           std::span<const bool> flags, double today);

/// Runs evaluate_day over a whole series, feeding each verdict forward.
std::vector<DayEvaluation> evaluate_series(const AnomalyPolicy& policy,
                                           std::span<const ActivityRecord> series);

struct RegionDeviation {
    NeuronId region = 0;
    double observed = 0.0;
    double expected = 0.0;
    double deviation = 0.0;  ///< observed - expected
};

struct RankedRegion {
    NeuronId region = 0;
    double deviation = 0.0;
    bool surplus = false;
    PlanarPoint site{};  ///< region weight, km
    LonLat site_lonlat{};
    std::optional<LonLat> centroid;  ///< cell centroid when a partition was given
};

struct AnomalyReport {
    DayKey day;
    double activity = 1.0;
    NeuronId bmu = 0;
    DayEvaluation evaluation;
    std::vector<RegionDeviation> deviations;  ///< one per region, by id
    std::vector<RankedRegion> top_regions;    ///< by |deviation|, zeros omitted
};

/// Compares the record's observed density vector with the prototype it was
/// matched to, zero-padded to the current region count.
AnomalyReport explain(const ActivityRecord& record, const DayEvaluation& evaluation,
                      const RegionModel& regions, const UtmProjection& projection,
                      std::size_t top_n = 10, const VoronoiPartition* partition = nullptr);

nlohmann::json report_to_json(const AnomalyReport& report);

/// FeatureCollection with one feature per region carrying
/// {region_id, observed, expected, deviation}. Throws ExportError naming the
/// first region without a cell.
nlohmann::json export_deviation_map(const AnomalyReport& report,
                                    const VoronoiPartition& partition,
                                    const UtmProjection& projection);

}  // namespace citygwr
