// Tripartite synapse model: Izhikevich neurons with glutamate release, a
// three-state Li-Rinzel-type astrocyte, and the couplings between them.
//
// Canonical units are uM, seconds, mV and uA. The neuron's V/U equations keep
// the Izhikevich millisecond time base; composed systems integrating in
// seconds multiply them by kMsPerSecond.
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "astrosyn/dynamics.hpp"

namespace astrosyn {

inline constexpr double kMsPerSecond = 1000.0;

struct NeuronParams {
    double a = 0.1;
    double b = 0.2;
    double c = -65.0;     // reset potential, mV
    double d = 2.0;       // recovery increment
    double alpha_glu = 10.0; // 1/s
    double k_glu = 600.0;    // uM/s
    double spike_threshold = 30.0; // mV
    double eta_syn = 0.025;
    double e_syn_excitatory = 0.0;   // mV
    double e_syn_inhibitory = -90.0; // mV
    double k_syn = 0.2;              // mV
    bool is_excitatory = true;

    double reversal() const noexcept { return is_excitatory ? e_syn_excitatory : e_syn_inhibitory; }
};

struct NeuronState {
    double V = -70.0;
    double U = -14.0;
    double G = 0.0;
};

// V and U rates are per ms, G rate is per s.
struct NeuronDerivative {
    double dV;
    double dU;
    double dG;
};

struct AstrocyteParams {
    double tau_ip3 = 1.0 / 0.14; // s
    double ip3_star = 0.16;      // uM
    double v1 = 6.0;             // 1/s
    double v2 = 0.11;            // 1/s
    double v3 = 2.2;             // uM/s
    double v4 = 0.3;             // uM/s
    double v6 = 0.2;             // uM/s
    double k1 = 0.5;             // 1/s
    double k2 = 1.0;             // uM
    double k3 = 0.1;             // uM
    double k4 = 1.1;             // uM
    double c0 = 2.0;             // uM
    double c1 = 0.185;
    double d1 = 0.13;   // uM
    double d2 = 1.049;  // uM
    double d3 = 0.9434; // uM (943.4 nM)
    double d5 = 0.082;  // uM (82 nM)
    double a2 = 0.14;   // 1/(uM s)
    double alpha = 0.8;
    double a_glu = 5.0;  // uM/s
    double g_thr = 0.7;
    double d_ca = 0.05;  // 1/s, gap junction
    double d_ip3 = 0.1;  // 1/s, gap junction
};

struct AstrocyteState {
    double x1 = 0.0; // IP3, uM
    double x2 = 0.0; // Ca2+, uM
    double x3 = 0.0; // active IP3R fraction

    std::array<double, 3> as_array() const noexcept { return {x1, x2, x3}; }
    static AstrocyteState from(std::span<const double> v) { return {v[0], v[1], v[2]}; }
};

using AstrocyteDerivative = AstrocyteState;

// Throws std::invalid_argument naming the offending field.
void validate(const NeuronParams& p);
void validate(const AstrocyteParams& p);

// Warnings for parameter sets that are valid but break an assumption of the
// analysis (currently: v1 <= v2 makes the calcium bound non-positive).
std::vector<std::string> analysis_warnings(const AstrocyteParams& p);

NeuronDerivative neuron_derivative(const NeuronState& s, double i_total, const NeuronParams& p);

struct ResetResult {
    NeuronState state;
    bool spiked;
};

ResetResult apply_spike_reset(const NeuronState& s, const NeuronParams& p);

// Sigmoidal reversal-potential synapse; the reversal comes from the
// presynaptic neuron's type.
double i_syn(double v_pre, double v_post, const NeuronParams& p_pre);

// Sigmoid activation 1/(1+exp(-v/k)) evaluated without overflow.
double synaptic_activation(double v_pre, double k_syn);

struct JgluMode {
    bool smooth = false;
    double k_s = 0.05;

    static JgluMode sharp() { return {}; }
    static JgluMode smoothed(double k_s = 0.05) { return {true, k_s}; }
};

double j_glu(double G, const AstrocyteParams& p, JgluMode mode = {});

AstrocyteDerivative astrocyte_derivative(const AstrocyteState& s, double u, const AstrocyteParams& p);

// Gliotransmission current: 2.11 ln(y) for y = x2[nM] - 196.69 > 1, else 0.
double i_astro(double x2);

inline constexpr double kAstroFitA = 6.3611;
inline constexpr double kAstroFitB = 14.682;
inline constexpr double kAstroFitC = -3.3582;
inline constexpr double kAstroFitD = 6.3611;

// Continuously differentiable tanh fit of i_astro over x2 in [0.05, 0.7] uM.
double i_astro_smooth(double x2);

// Unforced resting astrocyte state.
inline constexpr AstrocyteState kRestingAstrocyte{0.6858, 0.06612, 0.8882};

using InputProfile = std::function<double(double t)>;

// Piecewise-constant helpers for stimulus profiles.
InputProfile constant_input(double value);
InputProfile pulse_input(double amplitude, double duration);

struct TripartiteConfig {
    InputProfile stimulus = constant_input(0.0); // I_app into the presynaptic neuron, uA
    double duration = 6.0;
    double dt = kDefaultDt;
    double eta = 1.0; // gliotransmission fraction
    NeuronParams pre{};
    NeuronParams post{};
    AstrocyteParams astro{};
    JgluMode jglu{};
    std::size_t stride = 1;
    NeuronState pre0{};
    NeuronState post0{};
    AstrocyteState astro0 = kRestingAstrocyte;
};

// State layout of the composed tripartite system.
namespace tri {
inline constexpr std::size_t kPreV = 0, kPreU = 1, kPreG = 2;
inline constexpr std::size_t kX1 = 3, kX2 = 4, kX3 = 5;
inline constexpr std::size_t kPostV = 6, kPostU = 7, kPostG = 8;
inline constexpr std::size_t kDim = 9;
inline constexpr const char* kPreSpike = "pre_spike";
inline constexpr const char* kPostSpike = "post_spike";
} // namespace tri

Trajectory simulate_tripartite(const TripartiteConfig& config);

// Spike times carrying a given tag.
std::vector<double> event_times(const Trajectory& traj, const std::string& tag);

} // namespace astrosyn
