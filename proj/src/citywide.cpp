#include "citygwr/citywide.hpp"

#include <algorithm>
#include <charconv>

#include "citygwr/errors.hpp"

namespace citygwr {

CityModel::CityModel(Hyperparameters params) : params_(params) { params_.validate(); }

CityModel CityModel::from_parts(Hyperparameters params, std::optional<Network> net,
                                std::vector<ActivityRecord> series) {
    CityModel m(params);
    if (net) {
        if (!(net->params() == params)) throw PersistenceError("city network parameters differ");
        m.dim_ = net->input_dim();
    }
    m.net_ = std::move(net);
    m.series_ = std::move(series);
    return m;
}

void CityModel::on_region_created() {
    if (!net_) {
        net_.emplace(params_, 1);
    } else {
        net_->grow_input_dim();
    }
    ++dim_;
}

const ActivityRecord& CityModel::observe_day(const DailyDensityVector& x) {
    if (!net_ || x.densities.size() != dim_) {
        throw PipelineOrderError("day " + x.day.to_string() + " has " +
                                 std::to_string(x.densities.size()) +
                                 " regions but the city model expects " + std::to_string(dim_) +
                                 "; region growth must precede day observation");
    }
    ActivityRecord r;
    r.day = x.day;
    r.trip_count = x.trip_count;
    r.observed = x.densities;
    if (net_->seeded()) {
        const auto w = net_->weight(net_->find_bmu_pair(x.densities).bmu);
        r.expected.assign(w.begin(), w.end());
    }
    const StepOutcome out = net_->train_step(x.densities);
    r.activity = out.activity;
    r.bmu = out.bmu;
    r.distance = out.distance;
    r.event = out.event;
    r.created = out.created;
    if (r.expected.empty()) {
        const auto w = net_->weight(out.bmu);
        r.expected.assign(w.begin(), w.end());
    }
    series_.push_back(std::move(r));
    return series_.back();
}

std::vector<Prototype> CityModel::prototypes() const {
    std::vector<Prototype> out;
    if (!net_) return out;
    for (const auto& n : net_->neurons()) out.push_back({n.id, n.weight, n.habituation});
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json activity_record_to_json(const ActivityRecord& r) {
    nlohmann::json j{{"day", r.day.to_string()},
                     {"activity", r.activity},
                     {"bmu", r.bmu},
                     {"distance", r.distance},
                     {"event", to_string(r.event)},
                     {"trip_count", r.trip_count},
                     {"observed", r.observed},
                     {"expected", r.expected}};
    j["created"] = r.created ? nlohmann::json(*r.created) : nlohmann::json(nullptr);
    return j;
}

ActivityRecord activity_record_from_json(const nlohmann::json& j) {
    ActivityRecord r;
    r.day = DayKey::parse(j.at("day").get<std::string>());
    r.activity = j.at("activity").get<double>();
    r.bmu = j.at("bmu").get<NeuronId>();
    r.distance = j.at("distance").get<double>();
    const auto event = j.at("event").get<std::string>();
    if (event == "initializing") {
        r.event = StepEvent::Initializing;
    } else if (event == "updated") {
        r.event = StepEvent::WeightsUpdated;
    } else if (event == "created") {
        r.event = StepEvent::NeuronCreated;
    } else {
        throw PersistenceError("unknown activity event '" + event + "'");
    }
    if (!j.at("created").is_null()) r.created = j.at("created").get<NeuronId>();
    r.trip_count = j.at("trip_count").get<std::uint64_t>();
    r.observed = j.at("observed").get<std::vector<double>>();
    r.expected = j.at("expected").get<std::vector<double>>();
    return r;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_activity_csv(std::ostream& out, const std::vector<ActivityRecord>& series) {
    out << "date,activity,bmu_id,trip_count,event\n";
    for (const auto& r : series) {
        out << r.day.to_string() << ',' << format_double(r.activity) << ',' << r.bmu << ','
            << r.trip_count << ',' << to_string(r.event) << '\n';
    }
}

nlohmann::json prototypes_json(const std::vector<Prototype>& prototypes) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : prototypes) {
        nlohmann::json weights = nlohmann::json::object();
        double min_w = 0;
        for (std::size_t i = 0; i < p.weight.size(); ++i) {
            min_w = i == 0 ? p.weight[i] : std::min(min_w, p.weight[i]);
            weights[std::to_string(i)] = std::max(0.0, p.weight[i]);
        }
        list.push_back({{"id", p.id},
                        {"eta", p.habituation},
                        {"clamped", min_w < 0},
                        {"min_weight", min_w},
                        {"weights", std::move(weights)}});
    }
    return {{"prototypes", std::move(list)}};
}

}  // namespace citygwr
