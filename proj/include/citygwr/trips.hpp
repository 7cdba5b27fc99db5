#pragma once

// Porto-format taxi trip ingestion: CSV records -> RawTrip -> planar
// Trajectory. Per-record problems never abort the stream; they surface as
// Diagnostics carrying exactly one rejection reason.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citygwr/utm.hpp"

namespace citygwr {

enum class RejectReason {
    MalformedRow,
    BadTimestamp,
    MissingData,
    EmptyPolyline,
    MalformedPolyline,
    InvalidCoordinate,
    OutOfBounds,
    LateArrival,
};

const char* to_string(RejectReason reason);
inline constexpr int kRejectReasonCount = 8;

struct Diagnostic {
    std::uint64_t record = 0;  ///< 1-based data row number (header excluded)
    std::string trip_id;
    RejectReason reason = RejectReason::MalformedRow;
    std::string detail;
};

struct RawTrip {
    std::uint64_t record = 0;
    std::string trip_id;
    std::int64_t start_timestamp = 0;  ///< unix seconds
    std::vector<LonLat> polyline;
    bool missing_data = false;
};

/// Axis-aligned box in planar kilometres.
struct BoundingBox {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    bool contains(PlanarPoint p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
    double area() const { return (max_x - min_x) * (max_y - min_y); }
    bool degenerate() const { return !(max_x > min_x && max_y > min_y); }

    /// Planar envelope of a lon/lat rectangle (edges sampled densely, since
    /// meridians and parallels are curved under the projection).
    static BoundingBox envelope(const UtmProjection& proj, double min_lon, double min_lat,
                                double max_lon, double max_lat);

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Trajectory {
    std::uint64_t record = 0;
    std::string trip_id;
    std::int64_t start_timestamp = 0;
    std::vector<PlanarPoint> points;  ///< km, never empty

    PlanarPoint origin() const { return points.front(); }
};

struct GeoFrame {
    UtmProjection projection;
    BoundingBox bbox;

    /// Zone 29N and a lon/lat box around greater Porto.
    static GeoFrame porto();
};

/// Streaming reader over a Porto ECML/PKDD CSV. The header must name at least
/// TRIP_ID, TIMESTAMP, MISSING_DATA and POLYLINE; other columns are ignored.
class TripReader {
public:
    using Record = std::variant<RawTrip, Diagnostic>;

    /// Reads the header; throws IoError if it is missing or lacks a column.
    explicit TripReader(std::istream& in);

    /// Next record in file order, or nullopt at end of stream.
    std::optional<Record> next();

    std::uint64_t records_read() const { return record_; }

private:
    std::istream& in_;
    std::uint64_t record_ = 0;
    std::size_t columns_ = 0;
    std::size_t col_trip_id_ = 0;
    std::size_t col_timestamp_ = 0;
    std::size_t col_missing_ = 0;
    std::size_t col_polyline_ = 0;
    std::string line_;
    std::vector<std::string> fields_;
};

/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses "[[lon,lat],[lon,lat],...]". Returns nullopt on a syntax error.
std::optional<std::vector<LonLat>> parse_polyline(std::string_view text);

using TrajectoryResult = std::variant<Trajectory, RejectReason>;

/// Projects every point; rejects with OutOfBounds when the origin lies outside
/// the frame's bounding box.
TrajectoryResult to_trajectory(const RawTrip& trip, const GeoFrame& frame);

}  // namespace citygwr
