#pragma once

// Grow When Required (GWR) self-organizing network.
//
// A GWR network holds a set of prototype weight vectors ("neurons"), each with
// a habituation counter eta, plus an undirected graph of aged synapses. Every
// input either refines the best-matching unit (BMU) and its neighbours, or,
// when the BMU is both a poor match and already well trained, inserts a new
// neuron halfway between the input and the BMU. Never both.
//
// The network is dimension-generic and supports growing its input dimension
// at runtime (new trailing coordinate padded with 0 on every stored weight).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace citygwr {

using NeuronId = std::uint32_t;

/// How the weight update consumes the habituation counter of the same step.
enum class UpdateOrder {
    HabituationFirst,  ///< eta is updated, then the new eta scales the weight step
    Simultaneous,      ///< the weight step uses the pre-update eta
};

struct Hyperparameters {
    double activity_threshold = 0.36787944117144233;  // exp(-1): the 1 km boundary
    double firing_threshold = 0.1;
    double lr_bmu = 0.5;
    double lr_neighbor = 0.005;
    double habit_kappa = 1.05;
    double habit_tau_bmu = 0.0133;
    double habit_tau_neighbor = 0.00133;
    std::uint32_t max_synapse_age = 200;
    bool neuron_death_enabled = false;
    UpdateOrder update_order = UpdateOrder::HabituationFirst;

    /// Defaults for the origin-point (region) network.
    static Hyperparameters region_level();
    /// Defaults for the citywide daily-pattern network.
    static Hyperparameters city_level();

    /// Fixed point of the habituation recurrence, 1 - 1/kappa.
    double habituation_floor() const { return 1.0 - 1.0 / habit_kappa; }

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// exp(-d); throws InputError for negative or NaN d.
double activity(double squared_distance);

/// Symmetric map of synapse ages. Both directions are always stored with the
/// same age, there are no self edges, and iteration is ordered by id.
class SynapseGraph {
public:
    using Neighbors = std::map<NeuronId, std::uint32_t>;

    struct Synapse {
        NeuronId a;  // a < b
        NeuronId b;
        std::uint32_t age;
        friend bool operator==(const Synapse&, const Synapse&) = default;
    };

    std::optional<std::uint32_t> age(NeuronId i, NeuronId j) const;
    void connect(NeuronId i, NeuronId j, std::uint32_t age);
    bool disconnect(NeuronId i, NeuronId j);
    const Neighbors& neighbors(NeuronId i) const;
    bool isolated(NeuronId i) const { return neighbors(i).empty(); }
    void remove_node(NeuronId i);

    std::size_t edge_count() const;
    /// Every synapse once, sorted by (a, b).
    std::vector<Synapse> edges() const;

    friend bool operator==(const SynapseGraph&, const SynapseGraph&) = default;

private:
    std::map<NeuronId, Neighbors> adj_;
};

struct BmuPair {
    NeuronId bmu;
    NeuronId second;
    double bmu_distance;     ///< squared Euclidean distance to the BMU
    double second_distance;
};

enum class StepEvent { Initializing, WeightsUpdated, NeuronCreated };

const char* to_string(StepEvent event);

struct AgingResult {
    std::vector<std::pair<NeuronId, NeuronId>> pruned_synapses;
    std::vector<NeuronId> removed_neurons;
};

struct StepOutcome {
    NeuronId bmu = 0;
    /// Equal to bmu while the network is still collecting its two seeds.
    NeuronId second = 0;
    double distance = 0.0;
    double activity = 1.0;
    StepEvent event = StepEvent::Initializing;
    /// Set for NeuronCreated, and for Initializing steps that stored a seed.
    std::optional<NeuronId> created;
    std::vector<std::pair<NeuronId, NeuronId>> pruned_synapses;
    std::vector<NeuronId> removed_neurons;
};

/// Plain description of one neuron, used to build or inspect a network.
struct NeuronState {
    NeuronId id;
    std::vector<double> weight;
    double habituation;
    friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

class Network {
public:
    /// An empty network awaiting its two seed inputs. Validates params.
    Network(Hyperparameters params, std::size_t input_dim);

    /// Rebuilds a network from explicit state (used by restore and tests).
    /// Ids must be strictly increasing and below next_id; edges must refer to
    /// listed neurons.
    static Network from_state(Hyperparameters params, std::size_t input_dim,
                              std::vector<NeuronState> neurons,
                              const std::vector<SynapseGraph::Synapse>& edges,
                              std::uint64_t step_count, NeuronId next_id);

    /// One online learning step. Before two distinct inputs have been seen,
    /// the input is consumed as a seed and the event is Initializing.
    StepOutcome train_step(std::span<const double> x);

    /// BMU and runner-up by squared distance, ties to the lowest id.
    /// Requires a seeded network.
    BmuPair find_bmu_pair(std::span<const double> x) const;

    /// Habituation and weight update of b and every neighbour of b.
    void update_weights_and_habituation(NeuronId b, std::span<const double> x);

    /// Inserts r at (x + w_b) / 2 with eta = 1, wires r-b and r-s at age 1,
    /// and removes b-s.
    NeuronId create_neuron(NeuronId b, NeuronId s, std::span<const double> x);

    /// Ages every synapse of b except the one to s (and to `fresh`, a neuron
    /// wired to b during this step), prunes synapses older than the maximum
    /// age, and removes isolated neurons when death is enabled.
    AgingResult age_and_prune(NeuronId b, NeuronId s,
                              std::optional<NeuronId> fresh = std::nullopt);

    /// Appends a zero coordinate to every weight.
    void grow_input_dim();

    bool seeded() const { return ids_.size() >= 2; }
    std::size_t size() const { return ids_.size(); }
    std::size_t input_dim() const { return dim_; }
    std::uint64_t step_count() const { return step_count_; }
    NeuronId next_id() const { return next_id_; }
    const Hyperparameters& params() const { return params_; }
    const SynapseGraph& graph() const { return graph_; }
    const std::vector<NeuronId>& ids() const { return ids_; }

    bool contains(NeuronId id) const;
    std::span<const double> weight(NeuronId id) const;
    double habituation(NeuronId id) const;
    std::vector<NeuronState> neurons() const;

    friend bool operator==(const Network&, const Network&) = default;

private:
    std::size_t index_of(NeuronId id) const;
    void check_dim(std::span<const double> x) const;
    NeuronId append_neuron(std::span<const double> w, double eta);
    void remove_neuron(NeuronId id);
    void habituate_and_move(std::size_t index, std::span<const double> x,
                            double tau, double lr);

    Hyperparameters params_;
    std::size_t dim_;
    std::vector<NeuronId> ids_;     // strictly increasing
    std::vector<double> weights_;   // ids_.size() * dim_, row-major
    std::vector<double> eta_;
    SynapseGraph graph_;
    std::uint64_t step_count_ = 0;
    NeuronId next_id_ = 0;
};

}  // namespace citygwr
