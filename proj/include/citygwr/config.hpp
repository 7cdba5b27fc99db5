#pragma once

// Pipeline configuration and its TOML-style text form:
//
//   # comment
//   [section]
//   key = "string" | 12 | 0.5 | true | ["a", "b"] | [1.0, 2.0]
//
// Sections: input, geo, region, city, anomaly, output. Unknown sections or
// keys are errors so typos never silently fall back to defaults.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citygwr/anomaly.hpp"
#include "citygwr/gwr.hpp"
#include "citygwr/trips.hpp"

namespace citygwr {

using ConfigValue = std::variant<bool, std::int64_t, double, std::string,
                                 std::vector<std::string>, std::vector<double>>;

/// Flat "section.key" -> value map.
class ConfigDocument {
public:
    static ConfigDocument parse(std::string_view text);

    void set(const std::string& dotted_key, ConfigValue value);
    const std::map<std::string, ConfigValue>& values() const { return values_; }

private:
    std::map<std::string, ConfigValue> values_;
};

/// Parses a single value as it would appear to the right of '='.
ConfigValue parse_config_value(std::string_view text);

struct PipelineConfig {
    std::vector<std::filesystem::path> inputs;
    std::string timezone = "Europe/Lisbon";
    std::int64_t lateness_slack_seconds = 3600;

    int utm_zone = 29;
    bool utm_north = true;
    double min_lon = -8.80, min_lat = 40.95, max_lon = -8.30, max_lat = 41.45;

    Hyperparameters region = Hyperparameters::region_level();
    Hyperparameters city = Hyperparameters::city_level();

    AnomalyPolicy anomaly;
    std::size_t top_regions = 10;

    std::filesystem::path output_dir = "citygwr-out";
    int checkpoint_every_days = 30;  ///< 0: only at the end of a run

    /// Throws ConfigError naming the offending key.
    void validate() const;
    GeoFrame frame() const;

    /// Text of every setting that influences results (inputs, output
    /// directory and checkpoint cadence excluded), one key per line.
    std::string canonical() const;
    /// SHA-256 of canonical(), hex.
    std::string hash() const;
};

/// Applies a parsed document over the defaults. Relative input paths are
/// resolved against base_dir.
PipelineConfig config_from_document(const ConfigDocument& doc,
                                    const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& file);

}  // namespace citygwr
