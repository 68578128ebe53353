#include "astrosyn/dynamics.hpp"

#include <cmath>
#include <string>

namespace astrosyn {

std::vector<double> Trajectory::component(std::size_t index) const
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(s.at(index));
    }
    return out;
}

StateVector rk4_step(const StateVector& state, const Derivative& derivative, double t, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("rk4_step: dt must be positive");
    }
    StateVector next = state;
    Rk4Workspace ws(state.size());
    ws.step(std::span<double>(next), derivative, t, dt);
    return next;
}

std::size_t step_count(double duration, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("dt must be positive and finite");
    }
    if (!(duration >= dt * (1.0 - 1e-9))) {
        throw std::invalid_argument("duration must be at least one step");
    }
    return static_cast<std::size_t>(std::llround(duration / dt));
}

Trajectory simulate(const Derivative& derivative, const EventHandler& on_step, const StateVector& x0,
                    double duration, double dt, SimulateOptions options)
{
    if (options.stride == 0) {
        throw std::invalid_argument("simulate: stride must be >= 1");
    }
    const std::size_t steps = step_count(duration, dt);

    if (const auto bad = first_non_finite(x0); bad != x0.size()) {
        throw IntegrationError("non-finite initial state at index " + std::to_string(bad), 0.0, bad, 0);
    }

    Trajectory traj;
    traj.dt = dt * static_cast<double>(options.stride);
    traj.times.reserve(steps / options.stride + 1);
    traj.samples.reserve(steps / options.stride + 1);
    traj.times.push_back(0.0);
    traj.samples.push_back(x0);

    StateVector x = x0;
    Rk4Workspace ws(x.size());
    std::vector<std::string> tags;

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double t_next = static_cast<double>(k + 1) * dt;
        try {
            ws.step(std::span<double>(x), derivative, t, dt);
        } catch (const IntegrationError& e) {
            throw IntegrationError(std::string(e.what()) + " (step " + std::to_string(k) + ")", e.time(),
                                   e.index(), k);
        }
        if (on_step) {
            tags.clear();
            on_step(t_next, std::span<double>(x), tags);
            for (auto& tag : tags) {
                traj.events.push_back({t_next, std::move(tag)});
            }
        }
        if (const auto bad = first_non_finite(x); bad != x.size()) {
            throw IntegrationError("non-finite state after step " + std::to_string(k) + " at index "
                                       + std::to_string(bad),
                                   t_next, bad, k);
        }
        if ((k + 1) % options.stride == 0) {
            traj.times.push_back(t_next);
            traj.samples.push_back(x);
        }
    }
    return traj;
}

} // namespace astrosyn
