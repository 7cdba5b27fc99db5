#pragma once

// End-to-end run: CSV -> trajectories -> local days -> region model ->
// density vectors -> city model -> flags and explanations, with checkpoints
// that let a run stop after any day and resume with identical outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citygwr/anomaly.hpp"
#include "citygwr/citywide.hpp"
#include "citygwr/config.hpp"
#include "citygwr/region_map.hpp"

namespace citygwr {

inline constexpr int kManifestFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;

struct RunCounts {
    std::uint64_t records = 0;   ///< data rows read
    std::uint64_t accepted = 0;  ///< trips placed into a day
    std::map<std::string, std::uint64_t> rejected;  ///< by reason
    std::uint64_t days = 0;        ///< calendar days released, empty ones included
    std::uint64_t empty_days = 0;
    std::uint64_t regions = 0;
    std::uint64_t prototypes = 0;
    std::uint64_t flags = 0;
};

struct RunManifest {
    std::string config_hash;
    std::string input_digest;
    RunCounts counts;
    std::optional<std::int64_t> data_start;  ///< earliest accepted trip, unix seconds
    std::optional<std::int64_t> data_end;
    std::optional<DayKey> last_day;  ///< last day observed by the models
    bool complete = true;            ///< false when the run stopped early

    nlohmann::json to_json() const;
};

/// Model state after some prefix of days.
struct Checkpoint {
    std::string config_hash;
    std::string input_digest;
    std::string config_text;  ///< canonical config, enough to rebuild exports
    std::optional<DayKey> cursor;
    RegionModel regions;
    CityModel city;
};

nlohmann::json checkpoint_to_json(const Checkpoint& cp);
/// Throws PersistenceError on a version mismatch or malformed document.
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
/// Throws IoError when unreadable, PersistenceError when corrupt.
Checkpoint load_checkpoint(const std::filesystem::path& file);
void save_checkpoint(const std::filesystem::path& file, const Checkpoint& cp);

/// Config stored in a checkpoint (inputs and output directory are not kept).
PipelineConfig checkpoint_config(const Checkpoint& cp);

struct RunOptions {
    /// Continue from this state; days up to its cursor are read but not
    /// trained on. Refused (ConfigError) if the config hash or the input
    /// digest differ from the checkpoint's.
    std::optional<Checkpoint> resume;
    /// Stop once this day has been observed.
    std::optional<DayKey> stop_after;
};

/// Runs the pipeline and writes every output into config.output_dir:
/// activity.csv, flags.csv, regions.geojson, prototypes.json, anomalies.json,
/// deviations/<day>.geojson, diagnostics.jsonl, checkpoint.json and
/// manifest.json.
RunManifest run_pipeline(const PipelineConfig& config, const RunOptions& options = {});

// Exports over a model state.

/// Voronoi partition of the regions; a single region owns the whole box.
VoronoiPartition region_partition(const RegionModel& regions, const BoundingBox& bbox);

std::vector<AnomalyReport> anomaly_reports(const PipelineConfig& config, const Checkpoint& state,
                                           const VoronoiPartition& partition);

void write_flags_csv(std::ostream& out, const std::vector<ActivityRecord>& series,
                     const std::vector<DayEvaluation>& evaluations);

void export_regions(const PipelineConfig& config, const Checkpoint& state,
                    const std::filesystem::path& file);
void export_activity(const Checkpoint& state, const std::filesystem::path& file);
/// anomalies.json plus deviations/<day>.geojson under dir. Returns the number
/// of flagged days.
std::size_t export_anomalies(const PipelineConfig& config, const Checkpoint& state,
                             const std::filesystem::path& dir);
/// Report for one observed day, flagged or not. Throws InputError if the day
/// was not observed.
AnomalyReport replay_day(const PipelineConfig& config, const Checkpoint& state, DayKey day);

/// Writes text to file through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& file, const std::string& text);

}  // namespace citygwr
