// citygwr command line: runs the pipeline, resumes from checkpoints and
// re-exports results from a saved state.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 I/O or
// persistence failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "citygwr/errors.hpp"
#include "citygwr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace citygwr;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct ConfigArgs {
    std::string config_file;
    std::vector<std::string> inputs;
    std::string output;
    std::vector<std::string> sets;
};

void add_config_args(CLI::App* cmd, ConfigArgs& a) {
    cmd->add_option("-c,--config", a.config_file, "Config file (TOML-style key = value)");
    cmd->add_option("-i,--input", a.inputs, "Trip CSV file(s); replaces input.paths");
    cmd->add_option("-o,--output", a.output,
                    "Output directory (overrides CITYGWR_OUTPUT_DIR and output.directory)");
    cmd->add_option("--set", a.sets, "Override a setting, e.g. --set region.lr_bmu=0.4");
}

ConfigDocument read_document(const std::string& file) {
    if (file.empty()) return {};
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file);
    std::ostringstream text;
    text << in.rdbuf();
    return ConfigDocument::parse(text.str());
}

// Builds the effective config. `fallback_output` is used when neither the
// flag, the environment nor the file names an output directory.
PipelineConfig build_config(const ConfigArgs& a, ConfigDocument doc,
                            const fs::path& fallback_output = {}) {
    for (const auto& s : a.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects section.key=value, got " + s);
        }
        const std::string value = s.substr(eq + 1);
        ConfigValue v;
        try {
            v = parse_config_value(value);
        } catch (const ConfigError&) {
            v = value;  // bare words are strings
        }
        doc.set(s.substr(0, eq), std::move(v));
    }
    const bool file_sets_output = doc.values().count("output.directory") > 0;
    const fs::path base = a.config_file.empty() ? fs::path{} : fs::path(a.config_file).parent_path();
    PipelineConfig c = config_from_document(doc, base);
    if (!a.inputs.empty()) c.inputs.assign(a.inputs.begin(), a.inputs.end());
    if (!a.output.empty()) {
        c.output_dir = a.output;
    } else if (const char* env = std::getenv("CITYGWR_OUTPUT_DIR"); env && *env) {
        c.output_dir = env;
    } else if (!file_sets_output && !fallback_output.empty()) {
        c.output_dir = fallback_output;
    }
    return c;
}

std::optional<DayKey> parse_day(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        return DayKey::parse(s);
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

void print_summary(const RunManifest& m, const PipelineConfig& c) {
    std::cout << (m.complete ? "completed" : "stopped") << ": " << m.counts.days << " days ("
              << m.counts.empty_days << " empty), " << m.counts.accepted << " of "
              << m.counts.records << " trips accepted, " << m.counts.regions << " regions, "
              << m.counts.prototypes << " prototypes, " << m.counts.flags << " flagged days\n"
              << "outputs in " << c.output_dir.string() << '\n';
}

void write_text(const std::string& file, const std::string& text) {
    if (file.empty() || file == "-") {
        std::cout << text;
    } else {
        write_file_atomic(file, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-level GWR anomaly detection over taxi trip origins"};
    app.require_subcommand(1);

    ConfigArgs run_args;
    std::string run_stop;
    auto* run = app.add_subcommand("run", "Run the full pipeline");
    add_config_args(run, run_args);
    run->add_option("--stop-after-day", run_stop, "Stop (with a checkpoint) after this day");

    ConfigArgs resume_args;
    std::string resume_cp, resume_stop;
    auto* resume = app.add_subcommand("resume", "Continue a run from its checkpoint");
    add_config_args(resume, resume_args);
    resume->add_option("--checkpoint", resume_cp, "checkpoint.json from an earlier run")
        ->required();
    resume->add_option("--stop-after-day", resume_stop, "Stop again after this day");

    std::string cp_file, out_file, day_text;
    auto* ex_regions = app.add_subcommand("export-regions", "Region partition as GeoJSON");
    auto* ex_activity = app.add_subcommand("export-activity", "Daily activity as CSV");
    auto* ex_anomalies =
        app.add_subcommand("export-anomalies", "anomalies.json plus deviation maps");
    auto* replay = app.add_subcommand("replay-day", "Recompute one day's report");
    for (auto* cmd : {ex_regions, ex_activity, ex_anomalies, replay}) {
        cmd->add_option("--checkpoint", cp_file, "checkpoint.json")->required();
    }
    ex_regions->add_option("-o,--output", out_file, "Output file, '-' for stdout")
        ->default_val("-");
    ex_activity->add_option("-o,--output", out_file, "Output file, '-' for stdout")
        ->default_val("-");
    ex_anomalies->add_option("-o,--output", out_file, "Output directory")->required();
    replay->add_option("--day", day_text, "Day as YYYY-MM-DD")->required();
    replay->add_option("-o,--output", out_file, "Output file, '-' for stdout")
        ->default_val("-");

    ConfigArgs check_args;
    auto* check = app.add_subcommand("validate-config", "Check a config and print its hash");
    add_config_args(check, check_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            const auto config = build_config(run_args, read_document(run_args.config_file));
            RunOptions opts;
            opts.stop_after = parse_day(run_stop);
            print_summary(run_pipeline(config, opts), config);
        } else if (*resume) {
            Checkpoint cp = load_checkpoint(resume_cp);
            // Without a config file the stored settings are used as they are.
            ConfigDocument doc = resume_args.config_file.empty()
                                     ? ConfigDocument::parse(cp.config_text)
                                     : read_document(resume_args.config_file);
            const auto config =
                build_config(resume_args, std::move(doc), fs::path(resume_cp).parent_path());
            RunOptions opts;
            opts.stop_after = parse_day(resume_stop);
            opts.resume = std::move(cp);
            print_summary(run_pipeline(config, opts), config);
        } else if (*check) {
            const auto config = build_config(check_args, read_document(check_args.config_file));
            std::cout << config.canonical() << "# hash " << config.hash() << '\n';
        } else {
            const Checkpoint cp = load_checkpoint(cp_file);
            const PipelineConfig config = checkpoint_config(cp);
            if (*ex_regions) {
                const auto frame = config.frame();
                const auto partition = region_partition(cp.regions, frame.bbox);
                write_text(out_file,
                           regions_geojson(cp.regions, partition, frame.projection).dump(1) + "\n");
            } else if (*ex_activity) {
                std::ostringstream csv;
                write_activity_csv(csv, cp.city.series());
                write_text(out_file, csv.str());
            } else if (*ex_anomalies) {
                fs::create_directories(out_file);
                const auto n = export_anomalies(config, cp, out_file);
                std::cout << n << " flagged days written to " << out_file << '\n';
            } else if (*replay) {
                const DayKey day = *parse_day(day_text);
                write_text(out_file, report_to_json(replay_day(config, cp, day)).dump(1) + "\n");
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "citygwr: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InputError& e) {
        std::cerr << "citygwr: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "citygwr: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
