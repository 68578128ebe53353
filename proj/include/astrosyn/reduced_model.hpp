// Extended astrocyte model: astrocyte calcium drives a reduced firing-rate
// state x4 of the postsynaptic neuron through the gliotransmission current.
#pragma once

#include <string>
#include <vector>

#include "astrosyn/dynamics.hpp"
#include "astrosyn/tripartite.hpp"

namespace astrosyn {

struct FiringRateParams {
    double eta = 1.0;              // gliotransmission fraction in [0, 1]
    double i_thr = 3.9;            // uA
    double p1 = 16.82;             // Hz/uA
    double p2 = -40.29;            // Hz
    double tanh_gate_scale = 1.0;  // 1/uA
};

void validate(const FiringRateParams& p);

// x4' = -x4 + 0.5 (tanh(s (eta I - I_thr)) + 1) (p1 eta I + p2).
//
// This gated-affine form is not odd in its argument; it is the form the
// rate constants p1, p2 and I_thr were fitted for, so it is used as-is and
// x4 is not clamped (the unforced fixed point sits slightly below zero).
double firing_rate_derivative(double x4, double i_astro_value, const FiringRateParams& p);

// Fixed point of x4 for a constant current.
double firing_rate_fixed_point(double i_astro_value, const FiringRateParams& p);

enum class AstroCurrentModel { smooth, exact };

struct ExtendedConfig {
    InputProfile input = constant_input(0.0); // J_glu, uM/s, valued in [0, A_glu]
    double duration = 60.0;
    double dt = kDefaultDt;
    AstrocyteParams astro{};
    FiringRateParams rate{};
    AstroCurrentModel current = AstroCurrentModel::smooth;
    AstrocyteState astro0 = kRestingAstrocyte;
    double x40 = 0.0;
    std::size_t stride = 1;
};

// State layout: x1, x2, x3, x4.
Trajectory simulate_extended(const ExtendedConfig& config);

double astro_current(double x2, AstroCurrentModel model);

enum class ExtendedPreset { case1, case2, case3, pulse };

// Case 1: no input; Case 2: J_glu = A_glu persistent with eta = 1; Case 3: same
// input with eta = 0.25; pulse: J_glu = A_glu for 0.2 s with eta = 1.
ExtendedConfig extended_preset(ExtendedPreset preset, const AstrocyteParams& astro = {},
                               FiringRateParams rate = {});

ExtendedPreset parse_extended_preset(const std::string& name);

inline constexpr double kStrongEta = 1.0;
inline constexpr double kWeakEta = 0.25;
inline constexpr double kPulseDuration = 0.2;

} // namespace astrosyn
