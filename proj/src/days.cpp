#include "citygwr/days.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <boost/date_time/local_time/local_time.hpp>

#include "citygwr/errors.hpp"

namespace citygwr {

namespace chr = std::chrono;

DayKey DayKey::from_ymd(int year, unsigned month, unsigned day) {
    const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) throw InputError("invalid calendar date");
    return {static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count())};
}

DayKey DayKey::parse(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string s(text);
    if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw InputError("expected a date as YYYY-MM-DD, got '" + s + "'");
    }
    return from_ymd(y, m, d);
}

std::string DayKey::to_string() const {
    const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

// ---------------------------------------------------------------------------
// TimeZone

struct TimeZone::Impl {
    boost::local_time::time_zone_ptr zone;
};

namespace {

// TZif version 2+ files end with "\n<POSIX TZ rule>\n", describing the rules in
// force after the last explicit transition.
std::optional<std::string> zoneinfo_footer(std::string_view name) {
    if (name.empty() || name.find("..") != std::string_view::npos) return std::nullopt;
    const char* dir = std::getenv("TZDIR");
    const std::string path = std::string(dir ? dir : "/usr/share/zoneinfo") + "/" + std::string(name);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 6 || data.compare(0, 4, "TZif") != 0 || data.back() != '\n') {
        return std::nullopt;
    }
    const auto start = data.rfind('\n', data.size() - 2);
    if (start == std::string::npos) return std::nullopt;
    std::string rule = data.substr(start + 1, data.size() - start - 2);
    if (rule.empty()) return std::nullopt;
    return rule;
}

}  // namespace

TimeZone TimeZone::named(std::string_view name) {
    TimeZone tz;
    tz.name_ = std::string(name);
    tz.rule_ = zoneinfo_footer(name).value_or(std::string(name));
    try {
        auto impl = std::make_shared<Impl>();
        impl->zone.reset(new boost::local_time::posix_time_zone(tz.rule_));
        tz.impl_ = std::move(impl);
    } catch (const std::exception& e) {
        throw ConfigError("unknown time zone '" + tz.name_ + "': " + e.what());
    }
    return tz;
}

DayKey TimeZone::day_of(std::int64_t unix_seconds) const {
    using namespace boost::posix_time;
    static const ptime epoch(boost::gregorian::date(1970, 1, 1));
    const ptime utc = epoch + seconds(static_cast<long>(unix_seconds));
    const boost::local_time::local_date_time local(utc, impl_->zone);
    const auto date = local.local_time().date();
    return {static_cast<std::int32_t>((date - epoch.date()).days())};
}

// ---------------------------------------------------------------------------
// DayGrouper

DayGrouper::DayGrouper(TimeZone tz, std::int64_t slack_seconds)
    : tz_(std::move(tz)), slack_(slack_seconds) {
    if (slack_ < 0) throw ConfigError("lateness slack must be non-negative");
}

DayGrouper::PushResult DayGrouper::push(Trajectory trip) {
    PushResult result;
    const std::int64_t ts = trip.start_timestamp;
    if (max_ts_ && ts < *max_ts_ - slack_) {
        result.accepted = false;
        return result;
    }
    const DayKey day = tz_.day_of(ts);
    if (last_emitted_ && day <= *last_emitted_) {
        result.accepted = false;
        return result;
    }
    pending_[day].push_back(std::move(trip));
    max_ts_ = max_ts_ ? std::max(*max_ts_, ts) : ts;
    result.completed = release_before(tz_.day_of(*max_ts_ - slack_));
    return result;
}

std::vector<DayBatch> DayGrouper::finish() {
    std::vector<DayBatch> out;
    while (!pending_.empty()) {
        auto node = pending_.extract(pending_.begin());
        emit(node.key(), std::move(node.mapped()), out);
    }
    return out;
}

std::vector<DayBatch> DayGrouper::release_before(DayKey limit) {
    std::vector<DayBatch> out;
    while (!pending_.empty() && pending_.begin()->first < limit) {
        auto node = pending_.extract(pending_.begin());
        emit(node.key(), std::move(node.mapped()), out);
    }
    return out;
}

void DayGrouper::emit(DayKey day, std::vector<Trajectory> trips, std::vector<DayBatch>& out) {
    if (last_emitted_) {
        for (DayKey gap = last_emitted_->next(); gap < day; gap = gap.next()) {
            out.push_back({gap, {}});
        }
    }
    std::stable_sort(trips.begin(), trips.end(), [](const Trajectory& a, const Trajectory& b) {
        return a.start_timestamp < b.start_timestamp;
    });
    out.push_back({day, std::move(trips)});
    last_emitted_ = day;
}

}  // namespace citygwr
