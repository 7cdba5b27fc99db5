#include "citygwr/trips.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "citygwr/errors.hpp"

namespace citygwr {

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::MalformedRow: return "MalformedRow";
        case RejectReason::BadTimestamp: return "BadTimestamp";
        case RejectReason::MissingData: return "MissingData";
        case RejectReason::EmptyPolyline: return "EmptyPolyline";
        case RejectReason::MalformedPolyline: return "MalformedPolyline";
        case RejectReason::InvalidCoordinate: return "InvalidCoordinate";
        case RejectReason::OutOfBounds: return "OutOfBounds";
        case RejectReason::LateArrival: return "LateArrival";
    }
    return "Unknown";
}

BoundingBox BoundingBox::envelope(const UtmProjection& proj, double min_lon, double min_lat,
                                  double max_lon, double max_lat) {
    if (!(max_lon > min_lon && max_lat > min_lat)) {
        throw ConfigError("bounding box must have min < max on both axes");
    }
    constexpr int kSamples = 64;
    constexpr double inf = std::numeric_limits<double>::infinity();
    BoundingBox box{inf, inf, -inf, -inf};
    auto take = [&](double lon, double lat) {
        const PlanarPoint p = proj.forward({lon, lat});
        box.min_x = std::min(box.min_x, p.x);
        box.min_y = std::min(box.min_y, p.y);
        box.max_x = std::max(box.max_x, p.x);
        box.max_y = std::max(box.max_y, p.y);
    };
    for (int i = 0; i <= kSamples; ++i) {
        const double u = static_cast<double>(i) / kSamples;
        const double lon = min_lon + u * (max_lon - min_lon);
        const double lat = min_lat + u * (max_lat - min_lat);
        take(lon, min_lat);
        take(lon, max_lat);
        take(min_lon, lat);
        take(max_lon, lat);
    }
    return box;
}

GeoFrame GeoFrame::porto() {
    UtmProjection proj(29, true);
    return {proj, BoundingBox::envelope(proj, -8.80, 40.95, -8.30, 41.45)};
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

namespace {

void skip_ws(std::string_view s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

bool expect(std::string_view s, std::size_t& i, char c) {
    skip_ws(s, i);
    if (i < s.size() && s[i] == c) {
        ++i;
        return true;
    }
    return false;
}

bool parse_number(std::string_view s, std::size_t& i, double& out) {
    skip_ws(s, i);
    const char* first = s.data() + i;
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{}) return false;
    i += static_cast<std::size_t>(ptr - first);
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<bool> parse_flag(std::string_view s) {
    s = trim(s);
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "true" || lower == "1") return true;
    if (lower == "false" || lower == "0") return false;
    return std::nullopt;
}

}  // namespace

std::optional<std::vector<LonLat>> parse_polyline(std::string_view s) {
    std::vector<LonLat> pts;
    std::size_t i = 0;
    if (!expect(s, i, '[')) return std::nullopt;
    skip_ws(s, i);
    if (expect(s, i, ']')) {
        skip_ws(s, i);
        return i == s.size() ? std::optional(pts) : std::nullopt;
    }
    while (true) {
        LonLat p{};
        if (!expect(s, i, '[') || !parse_number(s, i, p.lon) || !expect(s, i, ',') ||
            !parse_number(s, i, p.lat) || !expect(s, i, ']')) {
            return std::nullopt;
        }
        pts.push_back(p);
        if (expect(s, i, ',')) continue;
        if (expect(s, i, ']')) break;
        return std::nullopt;
    }
    skip_ws(s, i);
    if (i != s.size()) return std::nullopt;
    return pts;
}

// ---------------------------------------------------------------------------
// TripReader

TripReader::TripReader(std::istream& in) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) throw IoError("trip CSV is empty or unreadable");
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    const auto names = split_csv_line(trim(header));
    columns_ = names.size();
    auto find = [&](std::string_view name) {
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (trim(names[k]) == name) return k;
        }
        throw IoError("trip CSV header lacks column " + std::string(name));
    };
    col_trip_id_ = find("TRIP_ID");
    col_timestamp_ = find("TIMESTAMP");
    col_missing_ = find("MISSING_DATA");
    col_polyline_ = find("POLYLINE");
}

std::optional<TripReader::Record> TripReader::next() {
    while (std::getline(in_, line_)) {
        if (trim(line_).empty()) continue;
        ++record_;
        fields_ = split_csv_line(trim(line_));

        Diagnostic diag;
        diag.record = record_;
        if (fields_.size() != columns_) {
            diag.reason = RejectReason::MalformedRow;
            diag.detail = "expected " + std::to_string(columns_) + " fields, got " +
                          std::to_string(fields_.size());
            if (fields_.size() > col_trip_id_) diag.trip_id = fields_[col_trip_id_];
            return diag;
        }
        diag.trip_id = fields_[col_trip_id_];

        RawTrip trip;
        trip.record = record_;
        trip.trip_id = fields_[col_trip_id_];

        const std::string_view ts = trim(fields_[col_timestamp_]);
        auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), trip.start_timestamp);
        if (ec != std::errc{} || ptr != ts.data() + ts.size() || ts.empty()) {
            diag.reason = RejectReason::BadTimestamp;
            diag.detail = std::string(ts);
            return diag;
        }

        const auto missing = parse_flag(fields_[col_missing_]);
        if (!missing) {
            diag.reason = RejectReason::MalformedRow;
            diag.detail = "MISSING_DATA is not a boolean";
            return diag;
        }
        trip.missing_data = *missing;
        if (trip.missing_data) {
            diag.reason = RejectReason::MissingData;
            return diag;
        }

        auto poly = parse_polyline(fields_[col_polyline_]);
        if (!poly) {
            diag.reason = RejectReason::MalformedPolyline;
            return diag;
        }
        if (poly->empty()) {
            diag.reason = RejectReason::EmptyPolyline;
            return diag;
        }
        for (const auto& p : *poly) {
            if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || std::abs(p.lat) > 90.0 ||
                std::abs(p.lon) > 180.0) {
                diag.reason = RejectReason::InvalidCoordinate;
                return diag;
            }
        }
        trip.polyline = std::move(*poly);
        return trip;
    }
    if (in_.bad()) throw IoError("read error in trip CSV");
    return std::nullopt;
}

TrajectoryResult to_trajectory(const RawTrip& trip, const GeoFrame& frame) {
    if (trip.polyline.empty()) return RejectReason::EmptyPolyline;
    Trajectory t;
    t.record = trip.record;
    t.trip_id = trip.trip_id;
    t.start_timestamp = trip.start_timestamp;
    t.points.reserve(trip.polyline.size());
    for (const auto& p : trip.polyline) t.points.push_back(frame.projection.forward(p));
    if (!frame.bbox.contains(t.origin())) return RejectReason::OutOfBounds;
    return t;
}

}  // namespace citygwr
