#include "astrosyn/tripartite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace astrosyn {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(name) + " must be positive and finite");
    }
}

void require_finite(double value, const char* name)
{
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

double cube(double x) { return x * x * x; }

} // namespace

void validate(const NeuronParams& p)
{
    require_finite(p.a, "neuron.a");
    require_finite(p.b, "neuron.b");
    require_finite(p.c, "neuron.c");
    require_finite(p.d, "neuron.d");
    require_positive(p.alpha_glu, "neuron.alpha_glu");
    require_positive(p.k_glu, "neuron.k_glu");
    require_finite(p.spike_threshold, "neuron.spike_threshold");
    require_finite(p.eta_syn, "neuron.eta_syn");
    require_finite(p.e_syn_excitatory, "neuron.e_syn_excitatory");
    require_finite(p.e_syn_inhibitory, "neuron.e_syn_inhibitory");
    require_positive(p.k_syn, "neuron.k_syn");
    if (p.c >= p.spike_threshold) {
        throw std::invalid_argument("neuron.c must lie below neuron.spike_threshold");
    }
}

void validate(const AstrocyteParams& p)
{
    require_positive(p.tau_ip3, "astrocyte.tau_ip3");
    require_positive(p.ip3_star, "astrocyte.ip3_star");
    require_positive(p.v1, "astrocyte.v1");
    require_positive(p.v2, "astrocyte.v2");
    require_positive(p.v3, "astrocyte.v3");
    require_positive(p.v4, "astrocyte.v4");
    require_positive(p.v6, "astrocyte.v6");
    require_positive(p.k1, "astrocyte.k1");
    require_positive(p.k2, "astrocyte.k2");
    require_positive(p.k3, "astrocyte.k3");
    require_positive(p.k4, "astrocyte.k4");
    require_positive(p.c0, "astrocyte.c0");
    require_positive(p.c1, "astrocyte.c1");
    require_positive(p.d1, "astrocyte.d1");
    require_positive(p.d2, "astrocyte.d2");
    require_positive(p.d3, "astrocyte.d3");
    require_positive(p.d5, "astrocyte.d5");
    require_positive(p.a2, "astrocyte.a2");
    require_positive(p.alpha, "astrocyte.alpha");
    require_positive(p.a_glu, "astrocyte.a_glu");
    require_positive(p.g_thr, "astrocyte.g_thr");
    require_positive(p.d_ca, "astrocyte.d_ca");
    require_positive(p.d_ip3, "astrocyte.d_ip3");
    if (p.alpha >= 1.0) {
        throw std::invalid_argument("astrocyte.alpha must lie in (0, 1)");
    }
}

std::vector<std::string> analysis_warnings(const AstrocyteParams& p)
{
    std::vector<std::string> out;
    if (p.v1 <= p.v2) {
        out.emplace_back("astrocyte.v1 <= astrocyte.v2: the calcium ultimate bound mu2 is not guaranteed positive");
    }
    return out;
}

NeuronDerivative neuron_derivative(const NeuronState& s, double i_total, const NeuronParams& p)
{
    NeuronDerivative d{};
    d.dV = 0.04 * s.V * s.V + 5.0 * s.V - s.U + 140.0 + i_total;
    d.dU = p.a * (p.b * s.V - s.U);
    d.dG = -p.alpha_glu * s.G + (s.V >= p.spike_threshold ? p.k_glu : 0.0);
    return d;
}

ResetResult apply_spike_reset(const NeuronState& s, const NeuronParams& p)
{
    if (s.V >= p.spike_threshold) {
        return {{p.c, s.U + p.d, s.G}, true};
    }
    return {s, false};
}

double synaptic_activation(double v_pre, double k_syn)
{
    const double z = -v_pre / k_syn;
    if (z > 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double i_syn(double v_pre, double v_post, const NeuronParams& p_pre)
{
    return p_pre.eta_syn * (p_pre.reversal() - v_post) * synaptic_activation(v_pre, p_pre.k_syn);
}

double j_glu(double G, const AstrocyteParams& p, JgluMode mode)
{
    double flux = 0.0;
    if (mode.smooth) {
        if (!(mode.k_s > 0.0)) {
            throw std::invalid_argument("j_glu: smooth steepness k_s must be positive");
        }
        flux = p.a_glu * 0.5 * (1.0 + std::tanh((G - p.g_thr) / mode.k_s));
    } else {
        flux = G >= p.g_thr ? p.a_glu : 0.0;
    }
    return std::clamp(flux, 0.0, p.a_glu);
}

AstrocyteDerivative astrocyte_derivative(const AstrocyteState& s, double u, const AstrocyteParams& p)
{
    const double x1 = s.x1;
    const double x2 = s.x2;
    const double x3 = s.x3;

    const double dx1 = (p.ip3_star - x1) / p.tau_ip3 + p.v4 * (x2 + (1.0 - p.alpha) * p.k4) / (x2 + p.k4) + u;

    // ER gradient term shared by the channel and leak fluxes.
    const double er = p.c0 / p.c1 - (1.0 + 1.0 / p.c1) * x2;
    const double channel = p.c1 * p.v1 * cube(x1 * x2 * x3) * er / (cube(x1 + p.d1) * cube(x2 + p.d5));
    const double pump = p.v3 * x2 * x2 / (p.k3 * p.k3 + x2 * x2);
    const double production = p.v6 * x1 * x1 / (p.k2 * p.k2 + x1 * x1);
    const double leak = p.c1 * p.v2 * er;
    const double dx2 = -p.k1 * x2 + channel - pump + production + leak;

    const double dx3 = p.a2 * (p.d2 * (x1 + p.d1) / (x1 + p.d3) * (1.0 - x3) - x2 * x3);

    return {dx1, dx2, dx3};
}

double i_astro(double x2)
{
    const double y = 1000.0 * x2 - 196.69;
    if (!(y > 1.0)) {
        return 0.0;
    }
    return 2.11 * std::log(y);
}

double i_astro_smooth(double x2)
{
    return kAstroFitA * std::tanh(kAstroFitB * x2 + kAstroFitC) + kAstroFitD;
}

InputProfile constant_input(double value)
{
    return [value](double) { return value; };
}

InputProfile pulse_input(double amplitude, double duration)
{
    return [amplitude, duration](double t) { return t < duration ? amplitude : 0.0; };
}

Trajectory simulate_tripartite(const TripartiteConfig& cfg)
{
    validate(cfg.pre);
    validate(cfg.post);
    validate(cfg.astro);
    if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) {
        throw std::invalid_argument("tripartite: eta must lie in [0, 1]");
    }
    if (!cfg.stimulus) {
        throw std::invalid_argument("tripartite: stimulus profile is empty");
    }

    // The stimulus is held constant over each step at its value at the step start.
    double i_app = 0.0;

    auto rhs = [&](double, std::span<const double> x, std::span<double> dx) {
        const NeuronState pre{x[tri::kPreV], x[tri::kPreU], x[tri::kPreG]};
        const NeuronState post{x[tri::kPostV], x[tri::kPostU], x[tri::kPostG]};
        const AstrocyteState astro{x[tri::kX1], x[tri::kX2], x[tri::kX3]};

        const auto d_pre = neuron_derivative(pre, i_app, cfg.pre);
        const double post_input = i_syn(pre.V, post.V, cfg.pre) + cfg.eta * i_astro(astro.x2);
        const auto d_post = neuron_derivative(post, post_input, cfg.post);
        const auto d_astro = astrocyte_derivative(astro, j_glu(pre.G, cfg.astro, cfg.jglu), cfg.astro);

        dx[tri::kPreV] = kMsPerSecond * d_pre.dV;
        dx[tri::kPreU] = kMsPerSecond * d_pre.dU;
        dx[tri::kPreG] = d_pre.dG;
        dx[tri::kX1] = d_astro.x1;
        dx[tri::kX2] = d_astro.x2;
        dx[tri::kX3] = d_astro.x3;
        dx[tri::kPostV] = kMsPerSecond * d_post.dV;
        dx[tri::kPostU] = kMsPerSecond * d_post.dU;
        dx[tri::kPostG] = d_post.dG;
    };

    auto reset = [&](double t, std::span<double> x, std::vector<std::string>& tags) {
        const auto apply = [&](std::size_t base, const NeuronParams& p, const char* tag) {
            const auto r = apply_spike_reset({x[base], x[base + 1], x[base + 2]}, p);
            if (r.spiked) {
                x[base] = r.state.V;
                x[base + 1] = r.state.U;
                tags.emplace_back(tag);
            }
        };
        apply(tri::kPreV, cfg.pre, tri::kPreSpike);
        apply(tri::kPostV, cfg.post, tri::kPostSpike);
        i_app = cfg.stimulus(t);
    };

    const StateVector x0{cfg.pre0.V,   cfg.pre0.U,   cfg.pre0.G,    cfg.astro0.x1, cfg.astro0.x2,
                         cfg.astro0.x3, cfg.post0.V, cfg.post0.U, cfg.post0.G};
    i_app = cfg.stimulus(0.0);
    return simulate(rhs, reset, x0, cfg.duration, cfg.dt, {cfg.stride});
}

std::vector<double> event_times(const Trajectory& traj, const std::string& tag)
{
    std::vector<double> out;
    for (const auto& e : traj.events) {
        if (e.tag == tag) {
            out.push_back(e.time);
        }
    }
    return out;
}

} // namespace astrosyn
