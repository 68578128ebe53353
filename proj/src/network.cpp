#include "astrosyn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace astrosyn {

namespace {

constexpr std::uint64_t kTopologyStream = 0x746f706f;   // "topo"
constexpr std::uint64_t kExcitatoryStream = 0x657863;   // "exc"
constexpr std::uint64_t kNoiseStream = 0x6e6f697365;    // "noise"

// Portable uniform draws from the raw 64-bit engine output, so that
// topologies do not depend on the standard library's distributions.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

std::size_t exact_sqrt(std::size_t n)
{
    auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return r * r == n ? r : 0;
}

double grid_distance(GridPos a, GridPos b, GridMetric metric)
{
    const double dx = std::abs(static_cast<double>(a.col) - static_cast<double>(b.col));
    const double dy = std::abs(static_cast<double>(a.row) - static_cast<double>(b.row));
    return metric == GridMetric::euclidean ? std::hypot(dx, dy) : std::max(dx, dy);
}

// Activations below this are dropped from the synaptic sums.
constexpr double kActivationFloor = 1e-30;

} // namespace

std::size_t NetworkParams::neuron_side() const { return exact_sqrt(n_neurons); }
std::size_t NetworkParams::astrocyte_side() const { return exact_sqrt(n_astrocytes); }

void validate(const NetworkParams& p)
{
    if (p.n_neurons == 0 || p.n_astrocytes == 0) {
        throw std::invalid_argument("network: neuron and astrocyte counts must be positive");
    }
    if (p.n_neurons != 4 * p.n_astrocytes) {
        throw std::invalid_argument("network.n_neurons must equal 4 * network.n_astrocytes");
    }
    if (p.neuron_side() == 0 || p.astrocyte_side() == 0) {
        throw std::invalid_argument("network: neuron and astrocyte counts must be perfect squares");
    }
    if (p.synapses_per_neuron >= p.n_neurons) {
        throw std::invalid_argument("network.synapses_per_neuron must be below n_neurons");
    }
    if (!(p.lambda > 0.0)) {
        throw std::invalid_argument("network.lambda must be positive");
    }
    if (!(p.ei_ratio > 0.0)) {
        throw std::invalid_argument("network.ei_ratio must be positive");
    }
    if (p.gap_junction_min > p.gap_junction_max) {
        throw std::invalid_argument("network.gap_junction_min exceeds gap_junction_max");
    }
    // Degrees produced by 4-neighbourhood adjacency on the astrocyte grid.
    const std::size_t aside = p.astrocyte_side();
    const std::size_t expected_min = aside == 1 ? 0 : 2;
    const std::size_t expected_max = aside == 1 ? 0 : (aside == 2 ? 2 : 4);
    if (p.gap_junction_min > expected_min || p.gap_junction_max < expected_max) {
        throw std::invalid_argument("network: grid gap junctions give degrees in [" + std::to_string(expected_min)
                                    + ", " + std::to_string(expected_max) + "], outside the configured range");
    }
}

std::vector<std::vector<std::uint32_t>> NetworkTopology::gap_neighbors() const
{
    std::vector<std::vector<std::uint32_t>> out(n_astrocytes());
    for (const auto& [a, b] : gap_junctions) {
        out[a].push_back(b);
        out[b].push_back(a);
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

NetworkTopology build_network(const NetworkParams& p)
{
    validate(p);
    NetworkTopology topo;
    const std::size_t n = p.n_neurons;
    const std::size_t side = p.neuron_side();
    const std::size_t aside = p.astrocyte_side();
    topo.neuron_side = side;
    topo.astrocyte_side = aside;

    topo.neuron_positions.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        topo.neuron_positions.push_back({static_cast<std::uint32_t>(i % side), static_cast<std::uint32_t>(i / side)});
    }

    // Exactly round(n r / (r + 1)) excitatory neurons, chosen by a seeded shuffle.
    const auto n_exc = static_cast<std::size_t>(std::llround(static_cast<double>(n) * p.ei_ratio / (p.ei_ratio + 1.0)));
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    {
        std::mt19937_64 rng(derive_seed(p.seed, kExcitatoryStream, 0));
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(order[i], order[uniform_index(rng, i + 1)]);
        }
    }
    topo.excitatory.assign(n, false);
    for (std::size_t i = 0; i < n_exc; ++i) topo.excitatory[order[i]] = true;

    // Distance-dependent outgoing synapses, sampled by inverse CDF with
    // rejection of self-connections (zero weight) and duplicates.
    topo.synapses.reserve(n * p.synapses_per_neuron);
    std::vector<double> cdf(n);
    std::vector<char> taken(n, 0);
    std::vector<std::uint32_t> chosen;
    for (std::size_t pre = 0; pre < n; ++pre) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != pre) {
                acc += std::exp(-grid_distance(topo.neuron_positions[pre], topo.neuron_positions[j], p.metric) / p.lambda);
            }
            cdf[j] = acc;
        }
        std::mt19937_64 rng(derive_seed(p.seed, kTopologyStream, pre));
        chosen.clear();
        while (chosen.size() < p.synapses_per_neuron) {
            const double r = unit_uniform(rng) * acc;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
            if (it == cdf.end()) continue;
            const auto post = static_cast<std::size_t>(it - cdf.begin());
            if (post == pre || taken[post]) continue;
            taken[post] = 1;
            chosen.push_back(static_cast<std::uint32_t>(post));
        }
        std::sort(chosen.begin(), chosen.end());
        for (auto post : chosen) {
            taken[post] = 0;
            topo.synapses.push_back({static_cast<std::uint32_t>(pre), post, static_cast<bool>(topo.excitatory[pre])});
        }
    }

    // Each astrocyte owns the 2x2 neuron block beneath it.
    topo.astro_assignment.resize(p.n_astrocytes);
    topo.astrocyte_of.assign(n, 0);
    for (std::size_t a = 0; a < p.n_astrocytes; ++a) {
        const std::size_t ac = a % aside;
        const std::size_t ar = a / aside;
        std::size_t k = 0;
        for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t neuron = (2 * ar + dy) * side + (2 * ac + dx);
                topo.astro_assignment[a][k++] = static_cast<std::uint32_t>(neuron);
                topo.astrocyte_of[neuron] = static_cast<std::uint32_t>(a);
            }
        }
    }

    // 4-neighbourhood gap junctions on the astrocyte grid.
    for (std::size_t a = 0; a < p.n_astrocytes; ++a) {
        const std::size_t ac = a % aside;
        const std::size_t ar = a / aside;
        if (ac + 1 < aside) topo.gap_junctions.emplace_back(a, a + 1);
        if (ar + 1 < aside) topo.gap_junctions.emplace_back(a, a + aside);
    }
    return topo;
}

void check_topology(const NetworkTopology& topo, const NetworkParams& p)
{
    const std::size_t n = topo.n_neurons();
    if (n != p.n_neurons || topo.n_astrocytes() != p.n_astrocytes) {
        throw std::logic_error("topology: unit counts differ from parameters");
    }
    std::vector<std::vector<std::uint32_t>> out(n);
    for (const auto& s : topo.synapses) {
        if (s.pre == s.post) throw std::logic_error("topology: self-synapse on neuron " + std::to_string(s.pre));
        if (s.excitatory != static_cast<bool>(topo.excitatory[s.pre])) {
            throw std::logic_error("topology: synapse type differs from presynaptic neuron type");
        }
        out[s.pre].push_back(s.post);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto v = out[i];
        std::sort(v.begin(), v.end());
        if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
            throw std::logic_error("topology: duplicate synapse from neuron " + std::to_string(i));
        }
        if (v.size() != p.synapses_per_neuron) {
            throw std::logic_error("topology: wrong out-degree on neuron " + std::to_string(i));
        }
    }
    std::vector<int> owners(n, 0);
    for (std::size_t a = 0; a < topo.n_astrocytes(); ++a) {
        for (auto neuron : topo.astro_assignment[a]) {
            ++owners[neuron];
            if (topo.astrocyte_of[neuron] != a) throw std::logic_error("topology: inconsistent astrocyte ownership");
        }
    }
    if (std::any_of(owners.begin(), owners.end(), [](int c) { return c != 1; })) {
        throw std::logic_error("topology: a neuron is not owned by exactly one astrocyte");
    }
    for (const auto& nbrs : topo.gap_neighbors()) {
        if (nbrs.size() < p.gap_junction_min || nbrs.size() > p.gap_junction_max) {
            throw std::logic_error("topology: gap-junction degree outside configured range");
        }
    }
}

CouplingTerms astro_coupling_terms(std::span<const AstrocyteState> states,
                                   const std::vector<std::vector<std::uint32_t>>& neighbors,
                                   const AstrocyteParams& p)
{
    if (states.size() != neighbors.size()) {
        throw std::invalid_argument("astro_coupling_terms: state count differs from astrocyte count");
    }
    CouplingTerms out{std::vector<double>(states.size(), 0.0), std::vector<double>(states.size(), 0.0)};
    for (std::size_t i = 0; i < states.size(); ++i) {
        double s1 = 0.0;
        double s2 = 0.0;
        for (auto j : neighbors[i]) {
            s1 += states[j].x1 - states[i].x1;
            s2 += states[j].x2 - states[i].x2;
        }
        out.d_ip3[i] = p.d_ip3 * s1;
        out.d_ca[i] = p.d_ca * s2;
    }
    return out;
}

CouplingTerms astro_coupling_terms(std::span<const AstrocyteState> states, const NetworkTopology& topo,
                                   const AstrocyteParams& p)
{
    return astro_coupling_terms(states, topo.gap_neighbors(), p);
}

std::vector<std::uint32_t> grid_patch(const NetworkTopology& topo, std::size_t col, std::size_t row,
                                      std::size_t size)
{
    if (size == 0 || col + size > topo.neuron_side || row + size > topo.neuron_side) {
        throw std::invalid_argument("grid_patch: patch exceeds the neuron grid");
    }
    std::vector<std::uint32_t> out;
    for (std::size_t r = row; r < row + size; ++r) {
        for (std::size_t c = col; c < col + size; ++c) {
            out.push_back(static_cast<std::uint32_t>(r * topo.neuron_side + c));
        }
    }
    return out;
}

std::vector<std::uint32_t> default_target_set(const NetworkTopology& topo)
{
    const std::size_t size = std::min<std::size_t>(6, topo.neuron_side);
    std::size_t origin = (topo.neuron_side - size) / 2;
    origin -= origin % 2; // align to astrocyte domains
    return grid_patch(topo, origin, origin, size);
}

void validate(const ProtocolSpec& protocol, const NetworkTopology& topo)
{
    if (!(protocol.t_stim > 0.0) || !(protocol.t_delay > 0.0) || !(protocol.t_recall > 0.0)) {
        throw std::invalid_argument("protocol: all phase durations must be positive");
    }
    if (protocol.target_set.empty()) {
        throw std::invalid_argument("protocol: target set is empty");
    }
    for (auto i : protocol.target_set) {
        if (i >= topo.n_neurons()) throw std::invalid_argument("protocol: target index out of range");
    }
    if (!(protocol.eta >= 0.0 && protocol.eta <= 1.0)) {
        throw std::invalid_argument("protocol.eta must lie in [0, 1]");
    }
    if (!(protocol.cue_noise_sd >= 0.0)) {
        throw std::invalid_argument("protocol.cue_noise_sd must be nonnegative");
    }
    if (protocol.trace_stride == 0) {
        throw std::invalid_argument("protocol.trace_stride must be >= 1");
    }
}

RasterData run_protocol(const NetworkTopology& topo, const ProtocolSpec& protocol, double dt,
                        const NetworkModel& model)
{
    validate(protocol, topo);
    validate(model.neuron);
    validate(model.astro);

    const std::size_t n = topo.n_neurons();
    const std::size_t na = topo.n_astrocytes();
    const NeuronParams& np = model.neuron;
    const AstrocyteParams& ap = model.astro;

    const std::size_t stim_steps = step_count(protocol.t_stim, dt);
    const std::size_t delay_end = stim_steps + step_count(protocol.t_delay, dt);
    const std::size_t total_steps = delay_end + step_count(protocol.t_recall, dt);

    // Outgoing adjacency in CSR form, split by presynaptic type via the flag array.
    std::vector<std::uint32_t> out_offset(n + 1, 0);
    for (const auto& s : topo.synapses) ++out_offset[s.pre + 1];
    for (std::size_t i = 0; i < n; ++i) out_offset[i + 1] += out_offset[i];
    std::vector<std::uint32_t> out_post(topo.synapses.size());
    {
        std::vector<std::uint32_t> fill(out_offset.begin(), out_offset.end() - 1);
        for (const auto& s : topo.synapses) out_post[fill[s.pre]++] = s.post;
    }
    const auto neighbors = topo.gap_neighbors();

    RasterData raster;
    raster.duration = static_cast<double>(total_steps) * dt;
    raster.is_target.assign(n, false);
    for (auto i : protocol.target_set) raster.is_target[i] = true;

    std::vector<double> neurons(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        neurons[3 * i] = -70.0;
        neurons[3 * i + 1] = np.b * -70.0;
        neurons[3 * i + 2] = 0.0;
    }
    std::vector<double> astro(3 * na);
    for (std::size_t a = 0; a < na; ++a) {
        astro[3 * a] = kRestingAstrocyte.x1;
        astro[3 * a + 1] = kRestingAstrocyte.x2;
        astro[3 * a + 2] = kRestingAstrocyte.x3;
    }

    std::vector<double> i_ext(n, 0.0);
    std::vector<double> i_astro_now(na, 0.0);
    std::vector<double> jglu(na, 0.0);
    std::vector<double> s_exc(n), s_inh(n);
    for (std::size_t a = 0; a < na; ++a) i_astro_now[a] = i_astro(astro[3 * a + 1]);

    const double v_silent = np.k_syn * std::log(kActivationFloor);
    auto neuron_rhs = [&](double, std::span<const double> x, std::span<double> dx) {
        std::fill(s_exc.begin(), s_exc.end(), 0.0);
        std::fill(s_inh.begin(), s_inh.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (x[3 * j] < v_silent) continue;
            const double act = synaptic_activation(x[3 * j], np.k_syn);
            if (act < kActivationFloor) continue;
            auto& sink = topo.excitatory[j] ? s_exc : s_inh;
            for (auto k = out_offset[j]; k < out_offset[j + 1]; ++k) sink[out_post[k]] += act;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x[3 * i];
            const double syn = np.eta_syn * (s_exc[i] * (np.e_syn_excitatory - v) + s_inh[i] * (np.e_syn_inhibitory - v));
            const double input = i_ext[i] + syn + protocol.eta * i_astro_now[topo.astrocyte_of[i]];
            const auto d = neuron_derivative({v, x[3 * i + 1], x[3 * i + 2]}, input, np);
            dx[3 * i] = kMsPerSecond * d.dV;
            dx[3 * i + 1] = kMsPerSecond * d.dU;
            dx[3 * i + 2] = d.dG;
        }
    };

    std::vector<AstrocyteState> astro_view(na);
    auto astro_rhs = [&](double, std::span<const double> x, std::span<double> dx) {
        for (std::size_t a = 0; a < na; ++a) astro_view[a] = {x[3 * a], x[3 * a + 1], x[3 * a + 2]};
        for (std::size_t a = 0; a < na; ++a) {
            const auto d = astrocyte_derivative(astro_view[a], jglu[a], ap);
            double s1 = 0.0;
            double s2 = 0.0;
            for (auto j : neighbors[a]) {
                s1 += astro_view[j].x1 - astro_view[a].x1;
                s2 += astro_view[j].x2 - astro_view[a].x2;
            }
            dx[3 * a] = d.x1 + ap.d_ip3 * s1;
            dx[3 * a + 1] = d.x2 + ap.d_ca * s2;
            dx[3 * a + 2] = d.x3;
        }
    };

    const BoundTriple omega = ultimate_bound(ap, ap.a_glu);
    const auto record_traces = [&](double t) {
        raster.trace_times.push_back(t);
        std::vector<double> row(na);
        for (std::size_t a = 0; a < na; ++a) row[a] = astro[3 * a + 1];
        raster.ca_traces.push_back(std::move(row));
    };
    record_traces(0.0);
    raster.min_astro_state = *std::min_element(astro.begin(), astro.end());

    Rk4Workspace neuron_ws(3 * n);
    Rk4Workspace astro_ws(3 * na);
    std::mt19937_64 noise_rng(derive_seed(protocol.seed, kNoiseStream, 0));
    std::normal_distribution<double> noise(0.0, 1.0);
    const bool cue = protocol.cue_enabled;

    for (std::size_t k = 0; k < total_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double t_next = static_cast<double>(k + 1) * dt;
        const char* phase = k < stim_steps ? "stimulation" : (k < delay_end ? "delay" : "recall");

        if (k < stim_steps) {
            std::fill(i_ext.begin(), i_ext.end(), 0.0);
            for (auto i : protocol.target_set) i_ext[i] = protocol.stim_amplitude;
        } else if (k < delay_end || !cue) {
            std::fill(i_ext.begin(), i_ext.end(), 0.0);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                i_ext[i] = protocol.cue_amplitude + protocol.cue_noise_sd * noise(noise_rng);
            }
        }

        try {
            // (1) neurons, (2) resets
            neuron_ws.step(std::span<double>(neurons), neuron_rhs, t, dt);
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = apply_spike_reset({neurons[3 * i], neurons[3 * i + 1], neurons[3 * i + 2]}, np);
                if (r.spiked) {
                    neurons[3 * i] = r.state.V;
                    neurons[3 * i + 1] = r.state.U;
                    raster.spikes.push_back({static_cast<std::uint32_t>(i), t_next});
                }
            }
            // (3) glutamate gating, OR over owned excitatory neurons
            for (std::size_t a = 0; a < na; ++a) {
                double flux = 0.0;
                for (auto i : topo.astro_assignment[a]) {
                    if (topo.excitatory[i]) flux = std::max(flux, j_glu(neurons[3 * i + 2], ap, protocol.jglu));
                }
                jglu[a] = std::min(flux, ap.a_glu);
            }
            // (4) astrocytes with gap coupling
            astro_ws.step(std::span<double>(astro), astro_rhs, t, dt);
        } catch (const IntegrationError& e) {
            throw IntegrationError(std::string(e.what()) + " during " + phase + " phase, step " + std::to_string(k),
                                   e.time(), e.index(), k);
        }
        if (const auto bad = first_non_finite(neurons); bad != neurons.size()) {
            throw IntegrationError(std::string("non-finite neuron state during ") + phase + " phase, step "
                                       + std::to_string(k),
                                   t_next, bad, k);
        }
        if (const auto bad = first_non_finite(astro); bad != astro.size()) {
            throw IntegrationError(std::string("non-finite astrocyte state during ") + phase + " phase, step "
                                       + std::to_string(k),
                                   t_next, bad, k);
        }

        // (5) gliotransmission current for the next step, plus trajectory audits
        double imbalance1 = 0.0;
        double imbalance2 = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
            const AstrocyteState s{astro[3 * a], astro[3 * a + 1], astro[3 * a + 2]};
            i_astro_now[a] = i_astro(s.x2);
            raster.min_astro_state = std::min({raster.min_astro_state, s.x1, s.x2, s.x3});
            if (2 * (k + 1) > total_steps) {
                const double e = std::max({s.x1 - omega.mu1, s.x2 - omega.mu2, s.x3 - omega.x3_max, 0.0});
                raster.max_bound_excursion = std::max(raster.max_bound_excursion, e);
            }
            for (auto j : neighbors[a]) {
                imbalance1 += astro[3 * j] - s.x1;
                imbalance2 += astro[3 * j + 1] - s.x2;
            }
        }
        raster.max_coupling_imbalance = std::max(
            {raster.max_coupling_imbalance, std::abs(ap.d_ip3 * imbalance1), std::abs(ap.d_ca * imbalance2)});

        if ((k + 1) % protocol.trace_stride == 0) record_traces(t_next);
    }
    return raster;
}

std::vector<TimeWindow> protocol_windows(const ProtocolSpec& p)
{
    return {{0.0, p.t_stim, "stimulation"},
            {p.t_stim, p.t_stim + p.t_delay, "delay"},
            {p.t_stim + p.t_delay, p.duration(), "recall"}};
}

RateSummary compute_rates(const RasterData& raster, const TimeWindow& window)
{
    if (!(window.t1 > window.t0)) {
        throw std::invalid_argument("compute_rates: window is empty");
    }
    const std::size_t n = raster.n_neurons();
    RateSummary out;
    out.window = window;
    out.per_neuron.assign(n, 0.0);
    std::vector<std::size_t> counts(n, 0);
    for (const auto& s : raster.spikes) {
        if (s.time >= window.t0 && s.time < window.t1 && s.neuron < n) ++counts[s.neuron];
    }
    const double length = window.t1 - window.t0;
    std::size_t n_target = 0;
    std::size_t c_target = 0;
    std::size_t c_other = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.per_neuron[i] = static_cast<double>(counts[i]) / length;
        if (raster.is_target[i]) {
            ++n_target;
            c_target += counts[i];
        } else {
            c_other += counts[i];
        }
    }
    const std::size_t n_other = n - n_target;
    out.target_rate = n_target ? static_cast<double>(c_target) / (length * static_cast<double>(n_target)) : 0.0;
    out.non_target_rate = n_other ? static_cast<double>(c_other) / (length * static_cast<double>(n_other)) : 0.0;
    if (out.non_target_rate > 0.0) {
        out.separation_ratio = out.target_rate / out.non_target_rate;
    } else {
        out.separation_ratio = out.target_rate > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    return out;
}

WmPreset parse_wm_preset(const std::string& name)
{
    if (name == "wm-strong") return WmPreset::strong;
    if (name == "wm-weak") return WmPreset::weak;
    if (name == "wm-none") return WmPreset::none;
    throw std::invalid_argument("unknown working-memory preset: " + name);
}

ProtocolSpec wm_preset(WmPreset preset, const NetworkTopology& topo, ProtocolSpec base)
{
    if (base.target_set.empty()) base.target_set = default_target_set(topo);
    switch (preset) {
    case WmPreset::strong:
        base.eta = 1.0;
        base.cue_enabled = false;
        break;
    case WmPreset::weak:
        base.eta = 0.25;
        base.cue_enabled = true;
        break;
    case WmPreset::none:
        base.eta = 0.0;
        base.cue_enabled = true;
        break;
    }
    return base;
}

} // namespace astrosyn
