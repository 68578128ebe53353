#include <doctest.h>

#include <cmath>
#include <limits>

#include "astrosyn/dynamics.hpp"

using namespace astrosyn;

namespace {

Derivative constant(double slope)
{
    return [slope](double, std::span<const double>, std::span<double> dx) { dx[0] = slope; };
}

Derivative decay()
{
    return [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
}

double decay_error(double dt)
{
    const auto traj = simulate(decay(), {}, {1.0}, 1.0, dt);
    return std::abs(traj.samples.back()[0] - std::exp(-1.0));
}

} // namespace

TEST_CASE("rk4_step on closed-form problems")
{
    CHECK(rk4_step({1.0}, constant(0.0), 0.0, 0.1)[0] == 1.0);
    CHECK(rk4_step({1.0}, decay(), 0.0, 0.1)[0] == doctest::Approx(std::exp(-0.1)).epsilon(1e-6));
    CHECK(rk4_step({0.0}, constant(1.0), 0.0, 1e-4)[0] == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("rk4_step does not modify its input and rejects bad steps")
{
    const StateVector x{2.0};
    const auto y = rk4_step(x, decay(), 0.0, 0.1);
    CHECK(x[0] == 2.0);
    CHECK(y[0] < 2.0);
    CHECK_THROWS_AS(rk4_step(x, decay(), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rk4_step(x, decay(), 0.0, -1e-3), std::invalid_argument);
}

TEST_CASE("simulate sample grid")
{
    const auto traj = simulate(constant(0.0), {}, {2.0}, 1.0, 0.1);
    REQUIRE(traj.size() == 11);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        CHECK(traj.samples[k][0] == 2.0);
        CHECK(traj.times[k] == doctest::Approx(0.1 * static_cast<double>(k)));
    }
}

TEST_CASE("simulate matches the analytic exponential")
{
    const auto traj = simulate(decay(), {}, {1.0}, 5.0, 1e-4);
    CHECK(std::abs(traj.samples.back()[0] - std::exp(-5.0)) < 1e-8);
    CHECK(traj.times.back() == doctest::Approx(5.0));
}

TEST_CASE("global error is fourth order")
{
    const double ratio = decay_error(0.1) / decay_error(0.05);
    CHECK(ratio >= 14.0);
    CHECK(ratio <= 18.0);
}

TEST_CASE("stride keeps every k-th sample")
{
    const auto full = simulate(decay(), {}, {1.0}, 1.0, 0.01);
    const auto thin = simulate(decay(), {}, {1.0}, 1.0, 0.01, {.stride = 10});
    REQUIRE(thin.size() == 11);
    for (std::size_t k = 0; k < thin.size(); ++k) {
        CHECK(thin.samples[k] == full.samples[10 * k]);
        CHECK(thin.times[k] == full.times[10 * k]);
    }
}

TEST_CASE("event handler fires at the analytic crossing")
{
    const double dt = 1e-3;
    bool armed = true;
    EventHandler handler = [&](double, std::span<double> x, std::vector<std::string>& tags) {
        if (armed && x[0] >= 0.5) {
            tags.push_back("cross");
            armed = false;
        }
    };
    const auto traj = simulate(constant(1.0), handler, {0.0}, 1.0, dt);
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.events[0].tag == "cross");
    CHECK(std::abs(traj.events[0].time - 0.5) <= dt + 1e-12);
}

TEST_CASE("event handler may modify state")
{
    EventHandler reset = [](double, std::span<double> x, std::vector<std::string>& tags) {
        if (x[0] >= 1.0) {
            x[0] = 0.0;
            tags.push_back("reset");
        }
    };
    const auto traj = simulate(constant(1.0), reset, {0.0}, 3.5, 0.01);
    CHECK(traj.events.size() == 3);
    for (const auto& s : traj.samples) CHECK(s[0] < 1.0);
}

TEST_CASE("identical inputs give identical trajectories")
{
    CHECK(simulate(decay(), {}, {0.3}, 2.0, 1e-3) == simulate(decay(), {}, {0.3}, 2.0, 1e-3));
}

TEST_CASE("non-finite state is reported with its context")
{
    Derivative blowup = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
    try {
        simulate(blowup, {}, {1.0}, 5.0, 0.01);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.index() == 0);
        CHECK(e.time() > 0.9);
        CHECK(e.time() < 1.1);
    }
    Derivative nan_rhs = [](double, std::span<const double>, std::span<double> dx) {
        dx[0] = std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(simulate(nan_rhs, {}, {1.0}, 1.0, 0.1), IntegrationError);
}

TEST_CASE("step_count")
{
    CHECK(step_count(1.0, 0.1) == 10);
    CHECK(step_count(4.0, 1e-4) == 40000);
    CHECK_THROWS_AS(step_count(1e-5, 1e-4), std::invalid_argument);
}
