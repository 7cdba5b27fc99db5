#include "citygwr/snapshot.hpp"

#include "citygwr/errors.hpp"

namespace citygwr {

using nlohmann::json;

json params_to_json(const Hyperparameters& p) {
    return json{
        {"activity_threshold", p.activity_threshold},
        {"firing_threshold", p.firing_threshold},
        {"lr_bmu", p.lr_bmu},
        {"lr_neighbor", p.lr_neighbor},
        {"habit_kappa", p.habit_kappa},
        {"habit_tau_bmu", p.habit_tau_bmu},
        {"habit_tau_neighbor", p.habit_tau_neighbor},
        {"max_synapse_age", p.max_synapse_age},
        {"neuron_death_enabled", p.neuron_death_enabled},
        {"update_order", p.update_order == UpdateOrder::HabituationFirst ? "habituation_first"
                                                                        : "simultaneous"},
    };
}

Hyperparameters params_from_json(const json& j) {
    Hyperparameters p;
    p.activity_threshold = j.at("activity_threshold").get<double>();
    p.firing_threshold = j.at("firing_threshold").get<double>();
    p.lr_bmu = j.at("lr_bmu").get<double>();
    p.lr_neighbor = j.at("lr_neighbor").get<double>();
    p.habit_kappa = j.at("habit_kappa").get<double>();
    p.habit_tau_bmu = j.at("habit_tau_bmu").get<double>();
    p.habit_tau_neighbor = j.at("habit_tau_neighbor").get<double>();
    p.max_synapse_age = j.at("max_synapse_age").get<std::uint32_t>();
    p.neuron_death_enabled = j.at("neuron_death_enabled").get<bool>();
    const auto order = j.at("update_order").get<std::string>();
    if (order == "habituation_first") {
        p.update_order = UpdateOrder::HabituationFirst;
    } else if (order == "simultaneous") {
        p.update_order = UpdateOrder::Simultaneous;
    } else {
        throw PersistenceError("unknown update_order '" + order + "'");
    }
    return p;
}

json snapshot(const Network& net) {
    json neurons = json::array();
    for (const auto& n : net.neurons()) {
        neurons.push_back(json{{"id", n.id}, {"w", n.weight}, {"eta", n.habituation}});
    }
    json edges = json::array();
    for (const auto& e : net.graph().edges()) edges.push_back(json::array({e.a, e.b, e.age}));
    return json{
        {"format_version", kSnapshotFormatVersion},
        {"params", params_to_json(net.params())},
        {"input_dim", net.input_dim()},
        {"step_count", net.step_count()},
        {"next_id", net.next_id()},
        {"neurons", std::move(neurons)},
        {"edges", std::move(edges)},
    };
}

std::string snapshot_string(const Network& net) { return snapshot(net).dump(); }

Network restore(const json& doc) {
    try {
        if (!doc.is_object()) throw PersistenceError("snapshot is not a JSON object");
        const int version = doc.at("format_version").get<int>();
        if (version != kSnapshotFormatVersion) {
            throw PersistenceError("snapshot format_version " + std::to_string(version) +
                                   " is not supported (expected " +
                                   std::to_string(kSnapshotFormatVersion) + ")");
        }
        std::vector<NeuronState> neurons;
        for (const auto& n : doc.at("neurons")) {
            neurons.push_back({n.at("id").get<NeuronId>(), n.at("w").get<std::vector<double>>(),
                               n.at("eta").get<double>()});
        }
        std::vector<SynapseGraph::Synapse> edges;
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw PersistenceError("malformed edge entry");
            const auto a = e[0].get<NeuronId>();
            const auto b = e[1].get<NeuronId>();
            edges.push_back({std::min(a, b), std::max(a, b), e[2].get<std::uint32_t>()});
        }
        return Network::from_state(params_from_json(doc.at("params")),
                                   doc.at("input_dim").get<std::size_t>(), std::move(neurons),
                                   edges, doc.at("step_count").get<std::uint64_t>(),
                                   doc.at("next_id").get<NeuronId>());
    } catch (const PersistenceError&) {
        throw;
    } catch (const std::exception& e) {
        throw PersistenceError(std::string("corrupt snapshot: ") + e.what());
    }
}

Network parse_snapshot(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw PersistenceError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    return restore(doc);
}

}  // namespace citygwr
