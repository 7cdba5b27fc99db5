#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citygwr/trips.hpp"

namespace citygwr {

/// A civil calendar date, stored as days since 1970-01-01.
struct DayKey {
    std::int32_t days = 0;

    static DayKey from_ymd(int year, unsigned month, unsigned day);
    /// Parses "YYYY-MM-DD"; throws InputError.
    static DayKey parse(std::string_view text);
    std::string to_string() const;

    DayKey next() const { return {days + 1}; }
    friend auto operator<=>(const DayKey&, const DayKey&) = default;
};

/// Local civil time zone. Accepts an IANA name (resolved through the system
/// zoneinfo database) or a POSIX TZ rule such as "WET0WEST,M3.5.0/1,M10.5.0".
class TimeZone {
public:
    static TimeZone named(std::string_view name);
    static TimeZone utc() { return named("UTC0"); }

    /// Calendar date of a unix timestamp in this zone.
    DayKey day_of(std::int64_t unix_seconds) const;

    const std::string& name() const { return name_; }
    const std::string& rule() const { return rule_; }

private:
    struct Impl;
    std::string name_;
    std::string rule_;
    std::shared_ptr<const Impl> impl_;
};

struct DayBatch {
    DayKey day;
    std::vector<Trajectory> trips;  ///< sorted by start timestamp, then file order

    bool empty() const { return trips.empty(); }
};

/// Groups a (nearly) time-ordered trajectory stream into local calendar days.
///
/// A trip may arrive up to `slack_seconds` behind the latest timestamp seen
/// and is still placed in order; later than that it is refused as
/// LateArrival. A day is released once the stream has moved `slack_seconds`
/// past it. Dates without trips between released days are released as empty
/// batches so gaps stay visible.
class DayGrouper {
public:
    DayGrouper(TimeZone tz, std::int64_t slack_seconds);

    struct PushResult {
        bool accepted = true;
        std::vector<DayBatch> completed;
    };

    PushResult push(Trajectory trip);
    /// Releases every pending day.
    std::vector<DayBatch> finish();

    const TimeZone& time_zone() const { return tz_; }

private:
    std::vector<DayBatch> release_before(DayKey limit);
    void emit(DayKey day, std::vector<Trajectory> trips, std::vector<DayBatch>& out);

    TimeZone tz_;
    std::int64_t slack_;
    std::optional<std::int64_t> max_ts_;
    std::optional<DayKey> last_emitted_;
    std::map<DayKey, std::vector<Trajectory>> pending_;
};

}  // namespace citygwr
