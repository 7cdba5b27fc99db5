#include "citygwr/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "citygwr/citywide.hpp"
#include "citygwr/days.hpp"
#include "citygwr/digest.hpp"
#include "citygwr/errors.hpp"

namespace citygwr {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Cuts a trailing comment, leaving '#' inside quoted strings alone.
std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && quoted) {
            ++i;
        } else if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == '#' && !quoted) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string parse_string(std::string_view s) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
        throw ConfigError("expected a quoted string, got " + std::string(s));
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        char c = s[i];
        if (c == '"') throw ConfigError("unescaped quote in " + std::string(s));
        if (c == '\\') {
            if (i + 2 >= s.size()) throw ConfigError("dangling escape in " + std::string(s));
            switch (s[++i]) {
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                default: throw ConfigError("unknown escape in " + std::string(s));
            }
        }
        out.push_back(c);
    }
    return out;
}

std::optional<ConfigValue> parse_number(std::string_view s) {
    const bool looks_float = s.find_first_of(".eE") != std::string_view::npos ||
                             s == "inf" || s == "-inf" || s == "nan";
    if (!looks_float) {
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
        if (ec == std::errc{} && p == s.data() + s.size()) return ConfigValue(i);
        return std::nullopt;
    }
    double d = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc{} && p == s.data() + s.size()) return ConfigValue(d);
    return std::nullopt;
}

// Splits the inside of "[...]" on commas outside quotes.
std::vector<std::string_view> split_array(std::string_view body) {
    std::vector<std::string_view> items;
    bool quoted = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '\\' && quoted) {
            ++i;
        } else if (body[i] == '"') {
            quoted = !quoted;
        } else if (body[i] == ',' && !quoted) {
            items.push_back(trim(body.substr(start, i - start)));
            start = i + 1;
        }
    }
    const auto last = trim(body.substr(start));
    if (!last.empty()) items.push_back(last);
    return items;
}

}  // namespace

ConfigValue parse_config_value(std::string_view text) {
    const auto s = trim(text);
    if (s.empty()) throw ConfigError("missing value");
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') return parse_string(s);
    if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated array " + std::string(s));
        const auto items = split_array(s.substr(1, s.size() - 2));
        if (items.empty()) return std::vector<std::string>{};
        if (items.front().front() == '"') {
            std::vector<std::string> out;
            for (auto it : items) out.push_back(parse_string(it));
            return out;
        }
        std::vector<double> out;
        for (auto it : items) {
            const auto v = parse_number(it);
            if (!v) throw ConfigError("array item is not a number: " + std::string(it));
            out.push_back(std::holds_alternative<double>(*v)
                              ? std::get<double>(*v)
                              : static_cast<double>(std::get<std::int64_t>(*v)));
        }
        return out;
    }
    if (auto v = parse_number(s)) return *v;
    throw ConfigError("cannot parse value " + std::string(s));
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
    ConfigDocument doc;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const auto line = trim(strip_comment(text.substr(pos, end - pos)));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        auto where = [&] { return "config line " + std::to_string(line_no) + ": "; };
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where() + "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError(where() + "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where() + "expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where() + "missing key");
        const std::string dotted = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (doc.values_.count(dotted)) throw ConfigError(where() + "duplicate key " + dotted);
        try {
            doc.values_[dotted] = parse_config_value(line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
    }
    return doc;
}

void ConfigDocument::set(const std::string& dotted_key, ConfigValue value) {
    values_[dotted_key] = std::move(value);
}

// ---------------------------------------------------------------------------
// PipelineConfig

namespace {

double as_double(const std::string& key, const ConfigValue& v) {
    if (auto d = std::get_if<double>(&v)) return *d;
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError(key + " must be a number");
}

std::int64_t as_int(const std::string& key, const ConfigValue& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    throw ConfigError(key + " must be an integer");
}

bool as_bool(const std::string& key, const ConfigValue& v) {
    if (auto b = std::get_if<bool>(&v)) return *b;
    throw ConfigError(key + " must be true or false");
}

std::string as_string(const std::string& key, const ConfigValue& v) {
    if (auto s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError(key + " must be a quoted string");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const ConfigValue&)>;

void add_hyper(std::map<std::string, Setter>& m, const std::string& section,
               Hyperparameters PipelineConfig::*member) {
    auto num = [&](const char* key, double Hyperparameters::*field) {
        m[section + "." + key] = [member, field](PipelineConfig& c, const std::string& k,
                                                 const ConfigValue& v) {
            (c.*member).*field = as_double(k, v);
        };
    };
    num("activity_threshold", &Hyperparameters::activity_threshold);
    num("firing_threshold", &Hyperparameters::firing_threshold);
    num("lr_bmu", &Hyperparameters::lr_bmu);
    num("lr_neighbor", &Hyperparameters::lr_neighbor);
    num("habit_kappa", &Hyperparameters::habit_kappa);
    num("habit_tau_bmu", &Hyperparameters::habit_tau_bmu);
    num("habit_tau_neighbor", &Hyperparameters::habit_tau_neighbor);
    m[section + ".max_synapse_age"] = [member](PipelineConfig& c, const std::string& k,
                                               const ConfigValue& v) {
        const auto age = as_int(k, v);
        if (age < 1 || age > 0xFFFFFFFF) throw ConfigError(k + " out of range");
        (c.*member).max_synapse_age = static_cast<std::uint32_t>(age);
    };
    m[section + ".neuron_death_enabled"] = [member](PipelineConfig& c, const std::string& k,
                                                    const ConfigValue& v) {
        (c.*member).neuron_death_enabled = as_bool(k, v);
    };
    m[section + ".update_order"] = [member](PipelineConfig& c, const std::string& k,
                                            const ConfigValue& v) {
        const auto s = as_string(k, v);
        if (s == "habituation_first") {
            (c.*member).update_order = UpdateOrder::HabituationFirst;
        } else if (s == "simultaneous") {
            (c.*member).update_order = UpdateOrder::Simultaneous;
        } else {
            throw ConfigError(k + " must be \"habituation_first\" or \"simultaneous\"");
        }
    };
}

const std::map<std::string, Setter>& setters() {
    static const auto table = [] {
        std::map<std::string, Setter> m;
        m["input.paths"] = [](PipelineConfig& c, const std::string& k, const ConfigValue& v) {
            if (auto s = std::get_if<std::string>(&v)) {
                c.inputs = {*s};
            } else if (auto a = std::get_if<std::vector<std::string>>(&v)) {
                c.inputs.assign(a->begin(), a->end());
            } else {
                throw ConfigError(k + " must be a string or an array of strings");
            }
        };
        m["input.timezone"] = [](PipelineConfig& c, const std::string& k, const ConfigValue& v) {
            c.timezone = as_string(k, v);
        };
        m["input.lateness_slack_seconds"] = [](PipelineConfig& c, const std::string& k,
                                               const ConfigValue& v) {
            c.lateness_slack_seconds = as_int(k, v);
        };
        m["geo.utm_zone"] = [](PipelineConfig& c, const std::string& k, const ConfigValue& v) {
            c.utm_zone = static_cast<int>(as_int(k, v));
        };
        m["geo.utm_north"] = [](PipelineConfig& c, const std::string& k, const ConfigValue& v) {
            c.utm_north = as_bool(k, v);
        };
        m["geo.bbox"] = [](PipelineConfig& c, const std::string& k, const ConfigValue& v) {
            const auto* a = std::get_if<std::vector<double>>(&v);
            if (!a || a->size() != 4) {
                throw ConfigError(k + " must be [min_lon, min_lat, max_lon, max_lat]");
            }
            c.min_lon = (*a)[0];
            c.min_lat = (*a)[1];
            c.max_lon = (*a)[2];
            c.max_lat = (*a)[3];
        };
        add_hyper(m, "region", &PipelineConfig::region);
        add_hyper(m, "city", &PipelineConfig::city);
        auto policy_int = [&](const char* key, int AnomalyPolicy::*field) {
            m[std::string("anomaly.") + key] = [field](PipelineConfig& c, const std::string& k,
                                                       const ConfigValue& v) {
                const auto i = as_int(k, v);
                if (i < -1'000'000 || i > 1'000'000) throw ConfigError(k + " out of range");
                c.anomaly.*field = static_cast<int>(i);
            };
        };
        policy_int("warmup_days", &AnomalyPolicy::warmup_days);
        policy_int("window", &AnomalyPolicy::window);
        policy_int("min_history", &AnomalyPolicy::min_history);
        m["anomaly.mad_multiplier"] = [](PipelineConfig& c, const std::string& k,
                                         const ConfigValue& v) {
            c.anomaly.mad_multiplier = as_double(k, v);
        };
        m["anomaly.min_spread"] = [](PipelineConfig& c, const std::string& k,
                                     const ConfigValue& v) {
            c.anomaly.min_spread = as_double(k, v);
        };
        m["anomaly.top_regions"] = [](PipelineConfig& c, const std::string& k,
                                      const ConfigValue& v) {
            const auto i = as_int(k, v);
            if (i < 1) throw ConfigError(k + " must be positive");
            c.top_regions = static_cast<std::size_t>(i);
        };
        m["output.directory"] = [](PipelineConfig& c, const std::string& k, const ConfigValue& v) {
            c.output_dir = as_string(k, v);
        };
        m["output.checkpoint_every_days"] = [](PipelineConfig& c, const std::string& k,
                                               const ConfigValue& v) {
            const auto i = as_int(k, v);
            if (i < 0 || i > 100000) throw ConfigError(k + " must be in [0, 100000]");
            c.checkpoint_every_days = static_cast<int>(i);
        };
        return m;
    }();
    return table;
}

}  // namespace

PipelineConfig config_from_document(const ConfigDocument& doc,
                                    const std::filesystem::path& base_dir) {
    PipelineConfig c;
    for (const auto& [key, value] : doc.values()) {
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("unknown config key " + key);
        it->second(c, key, value);
    }
    if (!base_dir.empty()) {
        for (auto& p : c.inputs) {
            if (p.is_relative()) p = base_dir / p;
        }
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return config_from_document(ConfigDocument::parse(text.str()), file.parent_path());
}

void PipelineConfig::validate() const {
    auto wrap = [](const char* section, const auto& check) {
        try {
            check();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(section) + ": " + e.what());
        }
    };
    wrap("region", [&] { region.validate(); });
    wrap("city", [&] { city.validate(); });
    wrap("anomaly", [&] { anomaly.validate(); });
    if (region.neuron_death_enabled) {
        throw ConfigError("region.neuron_death_enabled must be false");
    }
    if (lateness_slack_seconds < 0) {
        throw ConfigError("input.lateness_slack_seconds must be non-negative");
    }
    if (!(min_lon < max_lon && min_lat < max_lat) || min_lon < -180 || max_lon > 180 ||
        min_lat < -90 || max_lat > 90) {
        throw ConfigError("geo.bbox must be [min_lon, min_lat, max_lon, max_lat] in degrees");
    }
    if (utm_zone < 1 || utm_zone > 60) throw ConfigError("geo.utm_zone must lie in 1..60");
    if (checkpoint_every_days < 0) throw ConfigError("output.checkpoint_every_days must be >= 0");
    TimeZone::named(timezone);
}

GeoFrame PipelineConfig::frame() const {
    UtmProjection proj(utm_zone, utm_north);
    return {proj, BoundingBox::envelope(proj, min_lon, min_lat, max_lon, max_lat)};
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    auto hyper = [&](const char* s, const Hyperparameters& h) {
        out << '[' << s << "]\n"
            << "activity_threshold = " << format_double(h.activity_threshold) << '\n'
            << "firing_threshold = " << format_double(h.firing_threshold) << '\n'
            << "lr_bmu = " << format_double(h.lr_bmu) << '\n'
            << "lr_neighbor = " << format_double(h.lr_neighbor) << '\n'
            << "habit_kappa = " << format_double(h.habit_kappa) << '\n'
            << "habit_tau_bmu = " << format_double(h.habit_tau_bmu) << '\n'
            << "habit_tau_neighbor = " << format_double(h.habit_tau_neighbor) << '\n'
            << "max_synapse_age = " << h.max_synapse_age << '\n'
            << "neuron_death_enabled = " << (h.neuron_death_enabled ? "true" : "false") << '\n'
            << "update_order = \""
            << (h.update_order == UpdateOrder::HabituationFirst ? "habituation_first"
                                                                : "simultaneous")
            << "\"\n";
    };
    out << "[input]\n"
        << "timezone = \"" << timezone << "\"\n"
        << "lateness_slack_seconds = " << lateness_slack_seconds << '\n'
        << "[geo]\n"
        << "utm_zone = " << utm_zone << '\n'
        << "utm_north = " << (utm_north ? "true" : "false") << '\n'
        << "bbox = [" << format_double(min_lon) << ", " << format_double(min_lat) << ", "
        << format_double(max_lon) << ", " << format_double(max_lat) << "]\n";
    hyper("region", region);
    hyper("city", city);
    out << "[anomaly]\n"
        << "warmup_days = " << anomaly.warmup_days << '\n'
        << "window = " << anomaly.window << '\n'
        << "mad_multiplier = " << format_double(anomaly.mad_multiplier) << '\n'
        << "min_history = " << anomaly.min_history << '\n'
        << "min_spread = " << format_double(anomaly.min_spread) << '\n'
        << "top_regions = " << top_regions << '\n';
    return out.str();
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical()); }

}  // namespace citygwr
