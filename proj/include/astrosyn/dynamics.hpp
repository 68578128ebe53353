// Fixed-step integration of coupled ODE systems with post-step discrete events.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace astrosyn {

using StateVector = std::vector<double>;

// Right-hand side f(t, x) written into dxdt; dxdt has the same length as x.
using Derivative = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

// Applied after every accepted step. May rewrite the state (resets) and append
// event tags, which the caller timestamps with the post-step time.
using EventHandler = std::function<void(double t, std::span<double> x, std::vector<std::string>& tags)>;

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time, std::size_t index, std::size_t step = 0)
        : std::runtime_error(what), time_(time), index_(index), step_(step) {}

    double time() const noexcept { return time_; }
    std::size_t index() const noexcept { return index_; }
    std::size_t step() const noexcept { return step_; }

private:
    double time_;
    std::size_t index_;
    std::size_t step_;
};

struct Event {
    double time;
    std::string tag;

    bool operator==(const Event&) const = default;
};

// Uniformly sampled trajectory. `dt` is the spacing of the stored samples, i.e.
// the integration step times the storage stride.
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<StateVector> samples;
    std::vector<Event> events;

    std::size_t size() const noexcept { return times.size(); }
    std::size_t dimension() const noexcept { return samples.empty() ? 0 : samples.front().size(); }

    // Column view of one state component.
    std::vector<double> component(std::size_t index) const;

    bool operator==(const Trajectory&) const = default;
};

// Index of the first non-finite entry, or x.size() when all entries are finite.
inline std::size_t first_non_finite(std::span<const double> x) noexcept
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            return i;
        }
    }
    return x.size();
}

// Reusable workspace for in-place classical RK4 steps on a fixed dimension.
// `Rhs` is any callable with the Derivative signature; templating avoids the
// std::function dispatch in large network loops.
class Rk4Workspace {
public:
    explicit Rk4Workspace(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    std::size_t dimension() const noexcept { return tmp_.size(); }

    template <typename Rhs>
    void step(std::span<double> x, Rhs&& rhs, double t, double dt)
    {
        const std::size_t n = x.size();
        const double half = 0.5 * dt;

        rhs(t, std::span<const double>(x), std::span<double>(k1_));
        check(k1_, t);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];

        rhs(t + half, std::span<const double>(tmp_), std::span<double>(k2_));
        check(k2_, t + half);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];

        rhs(t + half, std::span<const double>(tmp_), std::span<double>(k3_));
        check(k3_, t + half);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];

        rhs(t + dt, std::span<const double>(tmp_), std::span<double>(k4_));
        check(k4_, t + dt);

        const double sixth = dt / 6.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        }
    }

private:
    static void check(std::span<const double> k, double t)
    {
        if (const auto bad = first_non_finite(k); bad != k.size()) {
            throw IntegrationError("non-finite derivative at t=" + std::to_string(t) + " index "
                                       + std::to_string(bad),
                                   t, bad);
        }
    }

    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

// One classical RK4 step; the input state is not modified.
StateVector rk4_step(const StateVector& state, const Derivative& derivative, double t, double dt);

struct SimulateOptions {
    // Store every `stride`-th sample; events are always recorded.
    std::size_t stride = 1;
};

// Default step used throughout the model: 0.1 ms.
inline constexpr double kDefaultDt = 1e-4;

// Integrates round(duration/dt) RK4 steps from x0, applying `on_step` (may be
// empty) after each step. Sample k sits at time k*dt.
Trajectory simulate(const Derivative& derivative, const EventHandler& on_step, const StateVector& x0,
                    double duration, double dt = kDefaultDt, SimulateOptions options = {});

// Number of steps covering `duration`, rejecting durations shorter than dt.
std::size_t step_count(double duration, double dt);

} // namespace astrosyn
