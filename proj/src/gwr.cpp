#include "citygwr/gwr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "citygwr/errors.hpp"

namespace citygwr {

namespace {

void require(bool ok, const std::string& constraint) {
    if (!ok) throw ConfigError("invalid hyperparameters: " + constraint);
}

}  // namespace

Hyperparameters Hyperparameters::region_level() {
    Hyperparameters p;
    p.activity_threshold = std::exp(-1.0);
    p.firing_threshold = 0.1;
    p.lr_bmu = 0.5;
    p.lr_neighbor = 0.005;
    p.habit_kappa = 1.05;
    p.habit_tau_bmu = 0.0133;
    p.habit_tau_neighbor = 0.00133;
    p.max_synapse_age = 200;
    // Removing a region would delete a coordinate of the citywide input.
    p.neuron_death_enabled = false;
    return p;
}

Hyperparameters Hyperparameters::city_level() {
    Hyperparameters p;
    p.activity_threshold = 1.0;
    p.firing_threshold = 0.1;
    p.lr_bmu = 0.5;
    p.lr_neighbor = 0.005;
    p.habit_kappa = 1.05;
    p.habit_tau_bmu = 0.3;
    p.habit_tau_neighbor = 0.1;
    p.max_synapse_age = 200;
    p.neuron_death_enabled = true;
    return p;
}

void Hyperparameters::validate() const {
    require(activity_threshold > 0.0 && activity_threshold <= 1.0,
            "activity_threshold must lie in (0, 1]");
    require(firing_threshold > 0.0 && firing_threshold < 1.0,
            "firing_threshold must lie in (0, 1)");
    require(lr_bmu > 0.0 && lr_bmu <= 1.0, "lr_bmu must lie in (0, 1]");
    require(lr_neighbor > 0.0 && lr_neighbor <= 1.0, "lr_neighbor must lie in (0, 1]");
    require(lr_neighbor <= lr_bmu, "lr_neighbor must not exceed lr_bmu");
    require(habit_kappa > 1.0 && std::isfinite(habit_kappa), "habit_kappa must be > 1");
    require(habit_tau_bmu > 0.0 && habit_tau_bmu < 1.0, "habit_tau_bmu must lie in (0, 1)");
    require(habit_tau_neighbor > 0.0 && habit_tau_neighbor < 1.0,
            "habit_tau_neighbor must lie in (0, 1)");
    require(habit_tau_neighbor <= habit_tau_bmu,
            "habit_tau_neighbor must not exceed habit_tau_bmu");
    require(max_synapse_age >= 1, "max_synapse_age must be a positive integer");
    require(firing_threshold > habituation_floor(),
            "firing_threshold must exceed 1 - 1/habit_kappa = " +
                std::to_string(habituation_floor()) +
                " or neurogenesis can never trigger");
}

double activity(double squared_distance) {
    if (!(squared_distance >= 0.0)) {
        throw InputError("activity: distance must be non-negative, got " +
                         std::to_string(squared_distance));
    }
    return std::exp(-squared_distance);
}

const char* to_string(StepEvent event) {
    switch (event) {
        case StepEvent::Initializing: return "initializing";
        case StepEvent::WeightsUpdated: return "updated";
        case StepEvent::NeuronCreated: return "created";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// SynapseGraph

std::optional<std::uint32_t> SynapseGraph::age(NeuronId i, NeuronId j) const {
    auto it = adj_.find(i);
    if (it == adj_.end()) return std::nullopt;
    auto jt = it->second.find(j);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

void SynapseGraph::connect(NeuronId i, NeuronId j, std::uint32_t age) {
    if (i == j) throw InputError("synapse graph: self edge on neuron " + std::to_string(i));
    adj_[i][j] = age;
    adj_[j][i] = age;
}

bool SynapseGraph::disconnect(NeuronId i, NeuronId j) {
    auto it = adj_.find(i);
    if (it == adj_.end() || it->second.erase(j) == 0) return false;
    if (it->second.empty()) adj_.erase(it);
    auto jt = adj_.find(j);
    jt->second.erase(i);
    if (jt->second.empty()) adj_.erase(jt);
    return true;
}

const SynapseGraph::Neighbors& SynapseGraph::neighbors(NeuronId i) const {
    static const Neighbors empty;
    auto it = adj_.find(i);
    return it == adj_.end() ? empty : it->second;
}

void SynapseGraph::remove_node(NeuronId i) {
    auto it = adj_.find(i);
    if (it == adj_.end()) return;
    const Neighbors nbrs = it->second;
    for (const auto& [j, age] : nbrs) disconnect(i, j);
}

std::size_t SynapseGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& [i, nbrs] : adj_) twice += nbrs.size();
    return twice / 2;
}

std::vector<SynapseGraph::Synapse> SynapseGraph::edges() const {
    std::vector<Synapse> out;
    for (const auto& [i, nbrs] : adj_) {
        for (const auto& [j, age] : nbrs) {
            if (i < j) out.push_back({i, j, age});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(Hyperparameters params, std::size_t input_dim)
    : params_(params), dim_(input_dim) {
    params_.validate();
    if (dim_ == 0) throw ConfigError("input_dim must be at least 1");
}

Network Network::from_state(Hyperparameters params, std::size_t input_dim,
                            std::vector<NeuronState> neurons,
                            const std::vector<SynapseGraph::Synapse>& edges,
                            std::uint64_t step_count, NeuronId next_id) {
    Network net(params, input_dim);
    for (std::size_t k = 0; k < neurons.size(); ++k) {
        const auto& n = neurons[k];
        if (k > 0 && n.id <= neurons[k - 1].id) {
            throw InputError("neuron ids must be strictly increasing");
        }
        if (n.id >= next_id) throw InputError("neuron id not below next_id");
        if (n.weight.size() != input_dim) {
            throw InputError("neuron " + std::to_string(n.id) + " has weight dimension " +
                             std::to_string(n.weight.size()) + ", expected " +
                             std::to_string(input_dim));
        }
        if (!(n.habituation > 0.0 && n.habituation <= 1.0)) {
            throw InputError("neuron " + std::to_string(n.id) + " habituation out of (0, 1]");
        }
        net.ids_.push_back(n.id);
        net.weights_.insert(net.weights_.end(), n.weight.begin(), n.weight.end());
        net.eta_.push_back(n.habituation);
    }
    for (const auto& e : edges) {
        if (!net.contains(e.a) || !net.contains(e.b)) {
            throw InputError("synapse refers to an unknown neuron");
        }
        if (e.age == 0) throw InputError("synapse ages are positive");
        net.graph_.connect(e.a, e.b, e.age);
    }
    net.step_count_ = step_count;
    net.next_id_ = next_id;
    return net;
}

bool Network::contains(NeuronId id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
}

std::size_t Network::index_of(NeuronId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) {
        throw InputError("no live neuron with id " + std::to_string(id));
    }
    return static_cast<std::size_t>(it - ids_.begin());
}

std::span<const double> Network::weight(NeuronId id) const {
    return std::span<const double>(weights_).subspan(index_of(id) * dim_, dim_);
}

double Network::habituation(NeuronId id) const { return eta_[index_of(id)]; }

std::vector<NeuronState> Network::neurons() const {
    std::vector<NeuronState> out;
    out.reserve(ids_.size());
    for (std::size_t k = 0; k < ids_.size(); ++k) {
        auto row = weights_.begin() + static_cast<std::ptrdiff_t>(k * dim_);
        out.push_back({ids_[k], std::vector<double>(row, row + static_cast<std::ptrdiff_t>(dim_)),
                       eta_[k]});
    }
    return out;
}

void Network::check_dim(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw InputError("input has dimension " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(dim_));
    }
}

NeuronId Network::append_neuron(std::span<const double> w, double eta) {
    const NeuronId id = next_id_++;
    ids_.push_back(id);
    weights_.insert(weights_.end(), w.begin(), w.end());
    eta_.push_back(eta);
    return id;
}

void Network::remove_neuron(NeuronId id) {
    const std::size_t k = index_of(id);
    graph_.remove_node(id);
    ids_.erase(ids_.begin() + static_cast<std::ptrdiff_t>(k));
    eta_.erase(eta_.begin() + static_cast<std::ptrdiff_t>(k));
    auto row = weights_.begin() + static_cast<std::ptrdiff_t>(k * dim_);
    weights_.erase(row, row + static_cast<std::ptrdiff_t>(dim_));
}

BmuPair Network::find_bmu_pair(std::span<const double> x) const {
    check_dim(x);
    if (!seeded()) throw InputError("find_bmu_pair: network has fewer than two neurons");

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    double best = inf, runner = inf;
    std::size_t bi = none, si = none;
    const double* w = weights_.data();
    for (std::size_t k = 0; k < ids_.size(); ++k, w += dim_) {
        double d = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double diff = x[j] - w[j];
            d += diff * diff;
        }
        // Strict comparisons keep the lowest id on ties (ids_ is sorted).
        if (d < best) {
            runner = best;
            si = bi;
            best = d;
            bi = k;
        } else if (d < runner) {
            runner = d;
            si = k;
        }
    }
    if (bi == none) bi = 0;
    if (si == none) si = bi == 0 ? 1 : 0;
    return {ids_[bi], ids_[si], best, runner};
}

void Network::habituate_and_move(std::size_t k, std::span<const double> x, double tau,
                                 double lr) {
    const double kappa = params_.habit_kappa;
    const double before = eta_[k];
    double after = before + tau * kappa * (1.0 - before) - tau;
    after = std::clamp(after, params_.habituation_floor(), 1.0);
    eta_[k] = after;

    const double step =
        lr * (params_.update_order == UpdateOrder::HabituationFirst ? after : before);
    double* w = weights_.data() + k * dim_;
    for (std::size_t j = 0; j < dim_; ++j) w[j] += step * (x[j] - w[j]);
}

void Network::update_weights_and_habituation(NeuronId b, std::span<const double> x) {
    check_dim(x);
    habituate_and_move(index_of(b), x, params_.habit_tau_bmu, params_.lr_bmu);
    for (const auto& [n, age] : graph_.neighbors(b)) {
        habituate_and_move(index_of(n), x, params_.habit_tau_neighbor, params_.lr_neighbor);
    }
}

NeuronId Network::create_neuron(NeuronId b, NeuronId s, std::span<const double> x) {
    check_dim(x);
    const auto wb = weight(b);
    std::vector<double> midpoint(dim_);
    for (std::size_t j = 0; j < dim_; ++j) midpoint[j] = (x[j] + wb[j]) / 2.0;
    if (!contains(s)) throw InputError("no live neuron with id " + std::to_string(s));
    const NeuronId r = append_neuron(midpoint, 1.0);
    graph_.connect(r, b, 1);
    graph_.connect(r, s, 1);
    graph_.disconnect(s, b);
    return r;
}

AgingResult Network::age_and_prune(NeuronId b, NeuronId s, std::optional<NeuronId> fresh) {
    AgingResult result;
    const SynapseGraph::Neighbors incident = graph_.neighbors(b);
    for (const auto& [n, age] : incident) {
        if (n == s || (fresh && n == *fresh)) continue;
        if (age + 1 > params_.max_synapse_age) {
            graph_.disconnect(b, n);
            result.pruned_synapses.emplace_back(std::min(b, n), std::max(b, n));
        } else {
            graph_.connect(b, n, age + 1);
        }
    }
    if (params_.neuron_death_enabled) {
        for (const auto& [lo, hi] : result.pruned_synapses) {
            const NeuronId n = lo == b ? hi : lo;
            if (n != s && graph_.isolated(n) && ids_.size() > 2) {
                remove_neuron(n);
                result.removed_neurons.push_back(n);
            }
        }
    }
    return result;
}

void Network::grow_input_dim() {
    const std::size_t new_dim = dim_ + 1;
    std::vector<double> grown(ids_.size() * new_dim, 0.0);
    for (std::size_t k = 0; k < ids_.size(); ++k) {
        std::copy_n(weights_.begin() + static_cast<std::ptrdiff_t>(k * dim_), dim_,
                    grown.begin() + static_cast<std::ptrdiff_t>(k * new_dim));
    }
    weights_ = std::move(grown);
    dim_ = new_dim;
}

StepOutcome Network::train_step(std::span<const double> x) {
    check_dim(x);
    for (double v : x) {
        if (!std::isfinite(v)) throw InputError("input contains a non-finite value");
    }
    StepOutcome out;

    if (!seeded()) {
        ++step_count_;
        out.event = StepEvent::Initializing;
        if (ids_.empty()) {
            out.bmu = out.second = append_neuron(x, 1.0);
            out.created = out.bmu;
            return out;
        }
        const auto w0 = weight(ids_.front());
        if (std::equal(x.begin(), x.end(), w0.begin())) {
            // Seeds must be distinct; the duplicate is consumed.
            out.bmu = out.second = ids_.front();
            return out;
        }
        out.second = ids_.front();
        out.bmu = append_neuron(x, 1.0);
        out.created = out.bmu;
        return out;
    }

    const BmuPair pair = find_bmu_pair(x);
    const NeuronId b = pair.bmu;
    const NeuronId s = pair.second;
    out.bmu = b;
    out.second = s;
    out.distance = pair.bmu_distance;
    out.activity = std::exp(-pair.bmu_distance);

    graph_.connect(s, b, 1);

    std::optional<NeuronId> fresh;
    if (out.activity < params_.activity_threshold &&
        eta_[index_of(b)] < params_.firing_threshold) {
        fresh = create_neuron(b, s, x);
        out.event = StepEvent::NeuronCreated;
        out.created = fresh;
    } else {
        update_weights_and_habituation(b, x);
        out.event = StepEvent::WeightsUpdated;
    }

    AgingResult aging = age_and_prune(b, s, fresh);
    out.pruned_synapses = std::move(aging.pruned_synapses);
    out.removed_neurons = std::move(aging.removed_neurons);
    ++step_count_;
    return out;
}

}  // namespace citygwr
