#include "astrosyn/reduced_model.hpp"

#include <cmath>
#include <stdexcept>

namespace astrosyn {

void validate(const FiringRateParams& p)
{
    if (!(p.eta >= 0.0 && p.eta <= 1.0)) {
        throw std::invalid_argument("firing_rate.eta must lie in [0, 1]");
    }
    if (!std::isfinite(p.i_thr) || !std::isfinite(p.p1) || !std::isfinite(p.p2)) {
        throw std::invalid_argument("firing_rate constants must be finite");
    }
    if (!(p.tanh_gate_scale > 0.0)) {
        throw std::invalid_argument("firing_rate.tanh_gate_scale must be positive");
    }
}

double firing_rate_fixed_point(double i_astro_value, const FiringRateParams& p)
{
    const double drive = p.eta * i_astro_value;
    const double gate = 0.5 * (std::tanh(p.tanh_gate_scale * (drive - p.i_thr)) + 1.0);
    return gate * (p.p1 * drive + p.p2);
}

double firing_rate_derivative(double x4, double i_astro_value, const FiringRateParams& p)
{
    return -x4 + firing_rate_fixed_point(i_astro_value, p);
}

double astro_current(double x2, AstroCurrentModel model)
{
    return model == AstroCurrentModel::smooth ? i_astro_smooth(x2) : i_astro(x2);
}

Trajectory simulate_extended(const ExtendedConfig& cfg)
{
    validate(cfg.astro);
    validate(cfg.rate);
    if (!cfg.input) {
        throw std::invalid_argument("extended: input profile is empty");
    }

    double u = 0.0;
    auto rhs = [&](double, std::span<const double> x, std::span<double> dx) {
        const auto d = astrocyte_derivative({x[0], x[1], x[2]}, u, cfg.astro);
        dx[0] = d.x1;
        dx[1] = d.x2;
        dx[2] = d.x3;
        dx[3] = firing_rate_derivative(x[3], astro_current(x[1], cfg.current), cfg.rate);
    };
    const auto sample_input = [&](double t) {
        const double value = cfg.input(t);
        if (!(value >= 0.0 && value <= cfg.astro.a_glu)) {
            throw std::invalid_argument("extended: input must lie in [0, A_glu]");
        }
        u = value;
    };
    auto on_step = [&](double t, std::span<double>, std::vector<std::string>&) { sample_input(t); };

    sample_input(0.0);
    const StateVector x0{cfg.astro0.x1, cfg.astro0.x2, cfg.astro0.x3, cfg.x40};
    return simulate(rhs, on_step, x0, cfg.duration, cfg.dt, {cfg.stride});
}

ExtendedConfig extended_preset(ExtendedPreset preset, const AstrocyteParams& astro, FiringRateParams rate)
{
    ExtendedConfig cfg;
    cfg.astro = astro;
    switch (preset) {
    case ExtendedPreset::case1:
        rate.eta = kStrongEta;
        cfg.input = constant_input(0.0);
        break;
    case ExtendedPreset::case2:
        rate.eta = kStrongEta;
        cfg.input = constant_input(astro.a_glu);
        break;
    case ExtendedPreset::case3:
        rate.eta = kWeakEta;
        cfg.input = constant_input(astro.a_glu);
        break;
    case ExtendedPreset::pulse:
        rate.eta = kStrongEta;
        cfg.input = pulse_input(astro.a_glu, kPulseDuration);
        break;
    }
    cfg.rate = rate;
    return cfg;
}

ExtendedPreset parse_extended_preset(const std::string& name)
{
    if (name == "case1") return ExtendedPreset::case1;
    if (name == "case2") return ExtendedPreset::case2;
    if (name == "case3") return ExtendedPreset::case3;
    if (name == "pulse") return ExtendedPreset::pulse;
    throw std::invalid_argument("unknown extended-model preset: " + name);
}

} // namespace astrosyn
