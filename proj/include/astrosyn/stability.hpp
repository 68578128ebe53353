// Equilibria, linearization and ultimate-bound analysis of the astrocyte
// dynamics, plus randomized positivity / boundedness verdicts.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "astrosyn/tripartite.hpp"

namespace astrosyn {

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Eigenvalues = std::array<std::complex<double>, 3>;

// Right-hand side of the astrocyte ODE with the input folded in. Property
// checks accept a replacement so that the checks themselves can be tested
// against deliberately broken dynamics.
using AstrocyteRhs = std::function<AstrocyteDerivative(const AstrocyteState&, double u)>;

AstrocyteRhs default_astrocyte_rhs(const AstrocyteParams& p);

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

struct EquilibriumOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    double fallback_horizon = 200.0; // s
    double fallback_dt = 1e-3;       // s
};

double residual_norm(const AstrocyteParams& p, const AstrocyteState& x, double u);

// Damped Newton on the astrocyte right-hand side with a finite-difference
// Jacobian. Steps are halved until the residual decreases without leaving
// the nonnegative orthant; if that stalls, the guess is replaced by the end
// point of a long simulation and Newton is restarted once.
AstrocyteState find_equilibrium(const AstrocyteParams& p, double u, const AstrocyteState& guess,
                                const EquilibriumOptions& options = {});

// Central differences with h_i = max(1e-6, 1e-6 |x_i|).
Matrix3 jacobian(const AstrocyteParams& p, const AstrocyteState& x, double u);

// Roots of the characteristic polynomial, sorted by real part then imaginary part.
Eigenvalues eigenvalues(const Matrix3& m);

// max_k ||(m - lambda_k I) v_k|| / ||v_k|| over computed eigenpairs.
double eigen_residual(const Matrix3& m, const Eigenvalues& lambdas);

struct BoundTriple {
    double mu1;
    double mu2;
    double x3_max = 1.0;

    bool contains(const AstrocyteState& x, double slack = 0.0) const noexcept
    {
        return x.x1 >= -slack && x.x1 <= mu1 + slack && x.x2 >= -slack && x.x2 <= mu2 + slack
               && x.x3 >= -slack && x.x3 <= x3_max + slack;
    }
};

BoundTriple ultimate_bound(const AstrocyteParams& p, double a_glu);

struct PositivityVerdict {
    bool pass = true;
    std::size_t trials = 0;
    double min_value = 0.0; // most negative state entry seen
    std::optional<AstrocyteState> counterexample_initial;
    double counterexample_time = 0.0;
    std::size_t counterexample_trial = 0;
};

struct BoundednessVerdict {
    bool pass = true;
    std::size_t trials = 0;
    double worst_settle_time = 0.0; // time of last entry into Omega, s
    double worst_overshoot = 0.0;   // largest excursion beyond Omega after settle window start
    std::optional<AstrocyteState> counterexample_initial;
    std::size_t counterexample_trial = 0;
};

struct PropertyCheckOptions {
    double horizon = 60.0; // s
    double dt = 1e-3;      // s
    double tolerance = 1e-9;
    // Width of the piecewise-constant segments of random input traces.
    double input_segment = 1.0;
    AstrocyteRhs rhs{}; // empty = astrocyte_derivative with the given parameters
};

// Input trace as a function of time; for random traces see random_input_trace.
using InputTrace = std::function<double(double t)>;

// Piecewise-constant trace with values uniform in [0, a_glu].
InputTrace random_input_trace(std::uint64_t seed, double a_glu, double segment, double horizon);

// Deterministic per-trial RNG seed derived from (seed, stream, trial).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial);

// Integrates the astrocyte ODE from x0 and reports the minimum entry seen.
struct AstrocyteRun {
    std::vector<double> times;
    std::vector<AstrocyteState> states;
};

AstrocyteRun integrate_astrocyte(const AstrocyteRhs& rhs, const AstrocyteState& x0, const InputTrace& u,
                                 double horizon, double dt, std::size_t stride = 1);

// Random initial conditions in [0, 2 mu1] x [0, 2 mu2] x [0, 1]. When
// `u_profile` is empty each trial draws its own random input trace.
PositivityVerdict check_positivity(const AstrocyteParams& p, const InputTrace& u_profile, std::size_t n_trials,
                                   std::uint64_t seed, PropertyCheckOptions options = {});

// Single-trajectory variant used for boundary cases.
PositivityVerdict check_positivity_from(const AstrocyteParams& p, const AstrocyteState& x0, const InputTrace& u,
                                        PropertyCheckOptions options = {});

struct BoundednessOptions {
    double horizon = 120.0;  // s
    double settle_fraction = 0.5; // must stay inside Omega for the final fraction
    double dt = 1e-3;
    double initial_scale = 3.0; // x1(0), x2(0) up to scale * bound
    double slack = 1e-9;
    double input_segment = 1.0;
    AstrocyteRhs rhs{};
};

BoundednessVerdict check_ultimate_boundedness(const AstrocyteParams& p, double a_glu, std::size_t n_trials,
                                              std::uint64_t seed, BoundednessOptions options = {});

// One trajectory from a given start; rejects x3 outside [0, 1] and negative states.
BoundednessVerdict check_ultimate_boundedness_from(const AstrocyteParams& p, double a_glu,
                                                   const AstrocyteState& x0, const InputTrace& u,
                                                   BoundednessOptions options = {});

struct StabilityReport {
    double input_level = 0.0;
    AstrocyteState equilibrium{};
    double residual = 0.0;
    Matrix3 jacobian{};
    Eigenvalues eigenvalues{};
    double eigen_residual = 0.0;
    BoundTriple bound{};
    bool locally_stable = false;
    PositivityVerdict positivity{};
    BoundednessVerdict boundedness{};
};

struct ReportOptions {
    std::size_t n_trials = 100;
    std::uint64_t seed = 0;
};

StabilityReport stability_report(const AstrocyteParams& p, double u, const AstrocyteState& guess,
                                 const ReportOptions& options = {});

} // namespace astrosyn
