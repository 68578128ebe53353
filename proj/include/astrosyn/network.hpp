// Dual-layer neuron-astrocyte working-memory network: grid topology,
// gap-junction coupling, and the stimulation / delay / recall protocol.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "astrosyn/stability.hpp"
#include "astrosyn/tripartite.hpp"

namespace astrosyn {

enum class GridMetric { euclidean, chebyshev };

struct NetworkParams {
    std::size_t n_neurons = 1296;
    std::size_t n_astrocytes = 324;
    std::size_t synapses_per_neuron = 28; // out-degree
    double lambda = 5.0;                  // grid-distance scale of exp(-r / lambda)
    std::size_t gap_junction_min = 2;
    std::size_t gap_junction_max = 4;
    double ei_ratio = 4.0; // excitatory : inhibitory
    std::uint64_t seed = 0;
    GridMetric metric = GridMetric::euclidean;

    std::size_t neuron_side() const;
    std::size_t astrocyte_side() const;
};

void validate(const NetworkParams& p);

struct Synapse {
    std::uint32_t pre;
    std::uint32_t post;
    bool excitatory;

    bool operator==(const Synapse&) const = default;
};

struct GridPos {
    std::uint32_t col;
    std::uint32_t row;

    bool operator==(const GridPos&) const = default;
};

struct NetworkTopology {
    std::size_t neuron_side = 0;
    std::size_t astrocyte_side = 0;
    std::vector<GridPos> neuron_positions;
    std::vector<bool> excitatory; // per neuron
    std::vector<Synapse> synapses;
    std::vector<std::array<std::uint32_t, 4>> astro_assignment; // astrocyte -> owned neurons
    std::vector<std::uint32_t> astrocyte_of;                     // neuron -> astrocyte
    std::vector<std::pair<std::uint32_t, std::uint32_t>> gap_junctions; // a < b

    std::size_t n_neurons() const noexcept { return neuron_positions.size(); }
    std::size_t n_astrocytes() const noexcept { return astro_assignment.size(); }

    // Gap-junction neighbors of each astrocyte, ascending.
    std::vector<std::vector<std::uint32_t>> gap_neighbors() const;

    bool operator==(const NetworkTopology&) const = default;
};

NetworkTopology build_network(const NetworkParams& p);

// Throws std::logic_error describing the first violated structural invariant.
void check_topology(const NetworkTopology& topo, const NetworkParams& p);

struct CouplingTerms {
    std::vector<double> d_ip3; // uM/s per astrocyte
    std::vector<double> d_ca;  // uM/s per astrocyte
};

// Diffusive gap-junction exchange added to the astrocyte equations.
CouplingTerms astro_coupling_terms(std::span<const AstrocyteState> states,
                                   const std::vector<std::vector<std::uint32_t>>& neighbors,
                                   const AstrocyteParams& p);
CouplingTerms astro_coupling_terms(std::span<const AstrocyteState> states, const NetworkTopology& topo,
                                   const AstrocyteParams& p);

struct ProtocolSpec {
    double t_stim = 0.2;
    double t_delay = 2.8;
    double t_recall = 1.0;
    std::vector<std::uint32_t> target_set;
    double stim_amplitude = 100.0; // uA
    bool cue_enabled = true;
    double cue_amplitude = 2.5;    // uA
    double cue_noise_sd = 6.0;     // uA, drawn per neuron per step
    double eta = 1.0;
    std::uint64_t seed = 0;        // noise stream
    JgluMode jglu{};
    std::size_t trace_stride = 100; // astrocyte trace decimation, in steps

    double duration() const noexcept { return t_stim + t_delay + t_recall; }
};

void validate(const ProtocolSpec& protocol, const NetworkTopology& topo);

// Contiguous square patch of neurons with its top-left corner at (col, row).
std::vector<std::uint32_t> grid_patch(const NetworkTopology& topo, std::size_t col, std::size_t row,
                                      std::size_t size);

// Default target set: 6x6 patch aligned to astrocyte domains near the grid centre.
std::vector<std::uint32_t> default_target_set(const NetworkTopology& topo);

struct SpikeEvent {
    std::uint32_t neuron;
    double time;

    bool operator==(const SpikeEvent&) const = default;
};

struct RasterData {
    double duration = 0.0;
    std::vector<SpikeEvent> spikes;       // time-ordered
    std::vector<bool> is_target;          // per neuron
    std::vector<double> trace_times;      // s
    std::vector<std::vector<double>> ca_traces; // [sample][astrocyte], uM
    double min_astro_state = 0.0;         // over all astrocytes and steps
    double max_bound_excursion = 0.0;     // beyond Omega after the first half of the run
    double max_coupling_imbalance = 0.0;  // |sum of gap exchange| over all steps

    std::size_t n_neurons() const noexcept { return is_target.size(); }
    bool operator==(const RasterData&) const = default;
};

struct NetworkModel {
    NeuronParams neuron{};
    AstrocyteParams astro{};
};

RasterData run_protocol(const NetworkTopology& topo, const ProtocolSpec& protocol, double dt = kDefaultDt,
                        const NetworkModel& model = {});

struct TimeWindow {
    double t0;
    double t1;
    std::string name;
};

struct RateSummary {
    TimeWindow window;
    double target_rate = 0.0;     // Hz, mean over target neurons
    double non_target_rate = 0.0; // Hz, mean over non-target neurons
    double separation_ratio = 1.0; // target / non-target; 1 when both are 0, +inf when only NT is 0
    std::vector<double> per_neuron; // Hz
};

// Mean firing rate of the target and non-target groups over [t0, t1).
RateSummary compute_rates(const RasterData& raster, const TimeWindow& window);

// Stimulation, delay and recall windows of a protocol.
std::vector<TimeWindow> protocol_windows(const ProtocolSpec& protocol);

enum class WmPreset { strong, weak, none };

WmPreset parse_wm_preset(const std::string& name);

// Strong: eta = 1 and no recall cue; weak: eta = 0.25 with cue; none: eta = 0 with cue.
ProtocolSpec wm_preset(WmPreset preset, const NetworkTopology& topo, ProtocolSpec base = {});

} // namespace astrosyn
