#include "citygwr/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "citygwr/days.hpp"
#include "citygwr/digest.hpp"
#include "citygwr/errors.hpp"
#include "citygwr/snapshot.hpp"
#include "citygwr/trips.hpp"

namespace citygwr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string iso_utc(std::int64_t unix_seconds) {
    const std::int64_t day = unix_seconds >= 0 ? unix_seconds / 86400
                                               : -((-unix_seconds + 86399) / 86400);
    const std::int64_t rem = unix_seconds - day * 86400;
    char buf[32];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", int(rem / 3600), int(rem / 60 % 60),
                  int(rem % 60));
    return DayKey{static_cast<std::int32_t>(day)}.to_string() + buf;
}

}  // namespace

json RunManifest::to_json() const {
    json rejected = json::object();
    for (const auto& [reason, n] : counts.rejected) rejected[reason] = n;
    return {
        {"format_versions",
         {{"manifest", kManifestFormatVersion},
          {"checkpoint", kCheckpointFormatVersion},
          {"snapshot", kSnapshotFormatVersion}}},
        {"config_hash", config_hash},
        {"input_digest", input_digest},
        {"complete", complete},
        {"data_start", data_start ? json(iso_utc(*data_start)) : json(nullptr)},
        {"data_end", data_end ? json(iso_utc(*data_end)) : json(nullptr)},
        {"last_day", last_day ? json(last_day->to_string()) : json(nullptr)},
        {"counts",
         {{"records", counts.records},
          {"accepted", counts.accepted},
          {"rejected", std::move(rejected)},
          {"days", counts.days},
          {"empty_days", counts.empty_days},
          {"regions", counts.regions},
          {"prototypes", counts.prototypes},
          {"flags", counts.flags}}},
    };
}

// ---------------------------------------------------------------------------
// Checkpoints

json checkpoint_to_json(const Checkpoint& cp) {
    json log = json::array();
    for (const auto& c : cp.regions.creation_log()) {
        log.push_back({c.step, c.id, c.bmu_distance, c.seed});
    }
    json series = json::array();
    for (const auto& r : cp.city.series()) series.push_back(activity_record_to_json(r));
    const auto& city_net = cp.city.net();
    return {
        {"format_version", kCheckpointFormatVersion},
        {"config_hash", cp.config_hash},
        {"input_digest", cp.input_digest},
        {"config", cp.config_text},
        {"cursor", cp.cursor ? json(cp.cursor->to_string()) : json(nullptr)},
        {"regions", {{"network", snapshot(cp.regions.net())}, {"creation_log", std::move(log)}}},
        {"city",
         {{"params", params_to_json(cp.city.params())},
          {"network", city_net ? snapshot(*city_net) : json(nullptr)},
          {"series", std::move(series)}}},
    };
}

Checkpoint checkpoint_from_json(const json& doc) {
    try {
        if (!doc.is_object()) throw PersistenceError("checkpoint is not a JSON object");
        const int version = doc.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion) {
            throw PersistenceError("checkpoint format_version " + std::to_string(version) +
                                   " is not supported (expected " +
                                   std::to_string(kCheckpointFormatVersion) + ")");
        }
        std::optional<DayKey> cursor;
        if (!doc.at("cursor").is_null()) cursor = DayKey::parse(doc.at("cursor").get<std::string>());

        std::vector<RegionCreation> log;
        for (const auto& e : doc.at("regions").at("creation_log")) {
            log.push_back({e.at(0).get<std::uint64_t>(), e.at(1).get<NeuronId>(),
                           e.at(2).get<double>(), e.at(3).get<bool>()});
        }
        RegionModel regions =
            RegionModel::from_parts(restore(doc.at("regions").at("network")), std::move(log));

        const auto& c = doc.at("city");
        std::optional<Network> city_net;
        if (!c.at("network").is_null()) city_net = restore(c.at("network"));
        std::vector<ActivityRecord> series;
        for (const auto& r : c.at("series")) series.push_back(activity_record_from_json(r));
        CityModel city =
            CityModel::from_parts(params_from_json(c.at("params")), std::move(city_net),
                                  std::move(series));
        if (city.input_dim() != regions.region_count()) {
            throw PersistenceError("checkpoint city dimension differs from its region count");
        }
        return Checkpoint{doc.at("config_hash").get<std::string>(),
                          doc.at("input_digest").get<std::string>(),
                          doc.at("config").get<std::string>(),
                          cursor,
                          std::move(regions),
                          std::move(city)};
    } catch (const PersistenceError&) {
        throw;
    } catch (const std::exception& e) {
        throw PersistenceError(std::string("malformed checkpoint: ") + e.what());
    }
}

Checkpoint load_checkpoint(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw PersistenceError("checkpoint " + file.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(doc);
}

void save_checkpoint(const fs::path& file, const Checkpoint& cp) {
    write_file_atomic(file, checkpoint_to_json(cp).dump() + "\n");
}

PipelineConfig checkpoint_config(const Checkpoint& cp) {
    try {
        return config_from_document(ConfigDocument::parse(cp.config_text));
    } catch (const ConfigError& e) {
        throw PersistenceError(std::string("checkpoint config is unusable: ") + e.what());
    }
}

void write_file_atomic(const fs::path& file, const std::string& text) {
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, file, ec);
    if (ec) throw IoError("cannot replace " + file.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Exports

VoronoiPartition region_partition(const RegionModel& regions, const BoundingBox& bbox) {
    if (regions.region_count() >= 2) return voronoi(regions.net(), bbox);
    std::vector<VoronoiCell> cells;
    if (regions.region_count() == 1) {
        const NeuronId id = regions.net().ids().front();
        const auto w = regions.net().weight(id);
        cells.push_back({id,
                         {w[0], w[1]},
                         {{bbox.min_x, bbox.min_y},
                          {bbox.max_x, bbox.min_y},
                          {bbox.max_x, bbox.max_y},
                          {bbox.min_x, bbox.max_y}}});
    }
    return VoronoiPartition(bbox, std::move(cells));
}

std::vector<AnomalyReport> anomaly_reports(const PipelineConfig& config, const Checkpoint& state,
                                           const VoronoiPartition& partition) {
    const auto& series = state.city.series();
    const auto evaluations = evaluate_series(config.anomaly, series);
    const UtmProjection proj(config.utm_zone, config.utm_north);
    std::vector<AnomalyReport> out;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!evaluations[i].flagged()) continue;
        out.push_back(explain(series[i], evaluations[i], state.regions, proj,
                              config.top_regions, &partition));
    }
    return out;
}

void write_flags_csv(std::ostream& out, const std::vector<ActivityRecord>& series,
                     const std::vector<DayEvaluation>& evaluations) {
    out << "date,activity,baseline,spread,threshold,status\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& e = evaluations[i];
        out << series[i].day.to_string() << ',' << format_double(e.activity) << ','
            << format_double(e.baseline) << ',' << format_double(e.spread) << ','
            << format_double(e.threshold) << ',' << to_string(e.status) << '\n';
    }
}

void export_regions(const PipelineConfig& config, const Checkpoint& state, const fs::path& file) {
    const GeoFrame frame = config.frame();
    const auto partition = region_partition(state.regions, frame.bbox);
    write_file_atomic(file, regions_geojson(state.regions, partition, frame.projection).dump(1) +
                                "\n");
}

void export_activity(const Checkpoint& state, const fs::path& file) {
    std::ostringstream out;
    write_activity_csv(out, state.city.series());
    write_file_atomic(file, out.str());
}

std::size_t export_anomalies(const PipelineConfig& config, const Checkpoint& state,
                             const fs::path& dir) {
    const GeoFrame frame = config.frame();
    const auto partition = region_partition(state.regions, frame.bbox);
    const auto reports = anomaly_reports(config, state, partition);
    const fs::path dev_dir = dir / "deviations";
    std::error_code ec;
    fs::create_directories(dev_dir, ec);
    if (ec) throw IoError("cannot create " + dev_dir.string() + ": " + ec.message());
    // Maps from an earlier run over the same directory would otherwise linger.
    for (const auto& entry : fs::directory_iterator(dev_dir)) {
        if (entry.path().extension() == ".geojson") fs::remove(entry.path());
    }
    json list = json::array();
    for (const auto& r : reports) {
        list.push_back(report_to_json(r));
        write_file_atomic(dev_dir / (r.day.to_string() + ".geojson"),
                          export_deviation_map(r, partition, frame.projection).dump(1) + "\n");
    }
    write_file_atomic(dir / "anomalies.json", json{{"anomalies", std::move(list)}}.dump(1) + "\n");
    return reports.size();
}

AnomalyReport replay_day(const PipelineConfig& config, const Checkpoint& state, DayKey day) {
    const auto& series = state.city.series();
    const auto evaluations = evaluate_series(config.anomaly, series);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].day != day) continue;
        const GeoFrame frame = config.frame();
        const auto partition = region_partition(state.regions, frame.bbox);
        return explain(series[i], evaluations[i], state.regions, frame.projection,
                       config.top_regions, &partition);
    }
    throw InputError("day " + day.to_string() + " was not observed in this checkpoint");
}

// ---------------------------------------------------------------------------
// Run

namespace {

class Runner {
public:
    Runner(const PipelineConfig& config, const RunOptions& options)
        : config_(config),
          options_(options),
          frame_(config.frame()),
          grouper_(TimeZone::named(config.timezone), config.lateness_slack_seconds),
          state_{config.hash(), "", config.canonical(), std::nullopt, RegionModel(config.region),
                 CityModel(config.city)} {}

    RunManifest run() {
        if (config_.inputs.empty()) throw ConfigError("no input files configured");
        state_.input_digest = sha256_files(config_.inputs);
        if (options_.resume) adopt(*options_.resume);

        for (std::size_t source = 0; source < config_.inputs.size() && !stopped_; ++source) {
            read_source(source);
        }
        if (!stopped_) {
            for (auto& day : grouper_.finish()) {
                process(std::move(day));
                if (stopped_) break;
            }
        }
        return finish();
    }

private:
    void adopt(const Checkpoint& cp) {
        if (cp.config_hash != state_.config_hash) {
            throw ConfigError("checkpoint was written with a different configuration (hash " +
                              cp.config_hash + ", current " + state_.config_hash + ")");
        }
        if (cp.input_digest != state_.input_digest) {
            throw ConfigError("checkpoint was written for different input data (digest " +
                              cp.input_digest + ", current " + state_.input_digest + ")");
        }
        state_.cursor = cp.cursor;
        state_.regions = cp.regions;
        state_.city = cp.city;
        resume_cursor_ = cp.cursor;
    }

    void read_source(std::size_t source) {
        std::ifstream in(config_.inputs[source], std::ios::binary);
        if (!in) throw IoError("cannot open input " + config_.inputs[source].string());
        TripReader reader(in);
        while (auto rec = reader.next()) {
            ++manifest_.counts.records;
            if (auto* d = std::get_if<Diagnostic>(&*rec)) {
                diagnose(source, *d);
                continue;
            }
            const auto& raw = std::get<RawTrip>(*rec);
            auto traj = to_trajectory(raw, frame_);
            if (auto* reason = std::get_if<RejectReason>(&traj)) {
                diagnose(source, {raw.record, raw.trip_id, *reason, ""});
                continue;
            }
            const std::int64_t ts = raw.start_timestamp;
            auto pushed = grouper_.push(std::move(std::get<Trajectory>(traj)));
            if (!pushed.accepted) {
                diagnose(source, {raw.record, raw.trip_id, RejectReason::LateArrival,
                                  "timestamp " + std::to_string(ts)});
            } else {
                ++manifest_.counts.accepted;
                manifest_.data_start = std::min(manifest_.data_start.value_or(ts), ts);
                manifest_.data_end = std::max(manifest_.data_end.value_or(ts), ts);
            }
            for (auto& day : pushed.completed) {
                process(std::move(day));
                if (stopped_) return;
            }
        }
    }

    void diagnose(std::size_t source, const Diagnostic& d) {
        ++manifest_.counts.rejected[to_string(d.reason)];
        json line{{"source", source},
                  {"record", d.record},
                  {"trip_id", d.trip_id},
                  {"reason", to_string(d.reason)}};
        if (!d.detail.empty()) line["detail"] = d.detail;
        diagnostics_ << line.dump() << '\n';
    }

    void process(DayBatch batch) {
        ++manifest_.counts.days;
        if (batch.empty()) {
            ++manifest_.counts.empty_days;
            diagnostics_ << json{{"day", batch.day.to_string()}, {"reason", "EmptyDay"}}.dump()
                         << '\n';
            return;
        }
        if (resume_cursor_ && batch.day <= *resume_cursor_) return;

        std::vector<RegionAssignment> assignments;
        assignments.reserve(batch.trips.size());
        for (const auto& trip : batch.trips) {
            auto obs = state_.regions.observe_origin(trip);
            if (obs.created) state_.city.on_region_created();
            assignments.push_back(std::move(obs.assignment));
        }
        state_.city.observe_day(density_vector(batch.day, assignments, state_.regions));
        state_.cursor = batch.day;

        if (config_.checkpoint_every_days > 0 &&
            manifest_.counts.days % std::uint64_t(config_.checkpoint_every_days) == 0) {
            ensure_output_dir();
            save_checkpoint(config_.output_dir / "checkpoint.json", state_);
        }
        if (options_.stop_after && batch.day >= *options_.stop_after) stopped_ = true;
    }

    void ensure_output_dir() {
        std::error_code ec;
        fs::create_directories(config_.output_dir, ec);
        if (ec) {
            throw IoError("cannot create output directory " + config_.output_dir.string() +
                          ": " + ec.message());
        }
    }

    RunManifest finish() {
        ensure_output_dir();
        const fs::path& out = config_.output_dir;
        const auto& series = state_.city.series();
        const auto evaluations = evaluate_series(config_.anomaly, series);

        {
            std::ostringstream csv;
            write_activity_csv(csv, series);
            write_file_atomic(out / "activity.csv", csv.str());
        }
        {
            std::ostringstream csv;
            write_flags_csv(csv, series, evaluations);
            write_file_atomic(out / "flags.csv", csv.str());
        }
        if (state_.regions.region_count() > 0) {
            export_regions(config_, state_, out / "regions.geojson");
        }
        write_file_atomic(out / "prototypes.json",
                          prototypes_json(state_.city.prototypes()).dump(1) + "\n");
        std::size_t flags = 0;
        if (state_.regions.region_count() > 0) flags = export_anomalies(config_, state_, out);
        write_file_atomic(out / "diagnostics.jsonl", diagnostics_.str());
        save_checkpoint(out / "checkpoint.json", state_);

        manifest_.config_hash = state_.config_hash;
        manifest_.input_digest = state_.input_digest;
        manifest_.counts.regions = state_.regions.region_count();
        manifest_.counts.prototypes = state_.city.prototypes().size();
        manifest_.counts.flags = flags;
        manifest_.last_day = state_.cursor;
        manifest_.complete = !stopped_;
        write_file_atomic(out / "manifest.json", manifest_.to_json().dump(1) + "\n");
        return manifest_;
    }

    const PipelineConfig& config_;
    const RunOptions& options_;
    GeoFrame frame_;
    DayGrouper grouper_;
    Checkpoint state_;
    std::optional<DayKey> resume_cursor_;
    bool stopped_ = false;
    RunManifest manifest_;
    std::ostringstream diagnostics_;
};

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config, const RunOptions& options) {
    config.validate();
    Runner runner(config, options);
    return runner.run();
}

}  // namespace citygwr
