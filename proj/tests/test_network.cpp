#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "astrosyn/network.hpp"

using namespace astrosyn;

namespace {

NetworkParams small_grid(std::size_t neuron_side, std::size_t seed = 1)
{
    NetworkParams p;
    p.n_neurons = neuron_side * neuron_side;
    p.n_astrocytes = p.n_neurons / 4;
    p.synapses_per_neuron = 6;
    p.seed = seed;
    return p;
}

std::map<std::uint32_t, std::size_t> degrees(const NetworkTopology& t)
{
    std::map<std::uint32_t, std::size_t> d;
    for (const auto& [a, b] : t.gap_junctions) {
        ++d[a];
        ++d[b];
    }
    return d;
}

} // namespace

TEST_CASE("default topology sizes")
{
    const NetworkParams p;
    const auto t = build_network(p);
    CHECK_NOTHROW(check_topology(t, p));
    CHECK(t.n_neurons() == 1296);
    CHECK(t.n_astrocytes() == 324);
    CHECK(t.synapses.size() == 1296u * 28u);
    CHECK(t.neuron_side == 36);
    CHECK(t.astrocyte_side == 18);
    const auto exc = std::count(t.excitatory.begin(), t.excitatory.end(), true);
    CHECK(exc == 1037);
    CHECK(t.n_neurons() - exc == 259);

    const auto d = degrees(t);
    CHECK(d.at(0) == 2);
    CHECK(d.at(17) == 2);
    CHECK(d.at(323) == 2);
    CHECK(d.at(1) == 3);
    CHECK(d.at(18 + 1) == 4);
    for (const auto& [a, n] : d) {
        CHECK(n >= 2);
        CHECK(n <= 4);
    }
}

TEST_CASE("synapse structure")
{
    const auto p = small_grid(8);
    const auto t = build_network(p);
    std::vector<std::size_t> out(t.n_neurons(), 0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& s : t.synapses) {
        CHECK(s.pre != s.post);
        CHECK(s.excitatory == t.excitatory[s.pre]);
        CHECK(seen.insert({s.pre, s.post}).second);
        ++out[s.pre];
    }
    for (auto n : out) CHECK(n == p.synapses_per_neuron);
}

TEST_CASE("distance-dependent connectivity prefers near neighbours")
{
    const NetworkParams p;
    const auto t = build_network(p);
    std::size_t near = 0;
    for (const auto& s : t.synapses) {
        const auto& a = t.neuron_positions[s.pre];
        const auto& b = t.neuron_positions[s.post];
        const double dx = double(a.col) - double(b.col), dy = double(a.row) - double(b.row);
        if (std::hypot(dx, dy) <= 5.0) ++near;
    }
    // Uniform sampling would put only ~6% of partners within radius 5.
    CHECK(double(near) / double(t.synapses.size()) > 0.3);
}

TEST_CASE("astrocyte domains")
{
    const auto p = small_grid(6);
    const auto t = build_network(p);
    std::vector<int> owned(t.n_neurons(), 0);
    for (std::size_t a = 0; a < t.n_astrocytes(); ++a) {
        for (auto n : t.astro_assignment[a]) {
            ++owned[n];
            CHECK(t.astrocyte_of[n] == a);
        }
    }
    for (int c : owned) CHECK(c == 1);
    // Astrocyte 0 owns the top-left 2x2 block.
    std::vector<GridPos> block;
    for (auto n : t.astro_assignment[0]) block.push_back(t.neuron_positions[n]);
    for (const auto& g : block) {
        CHECK(g.col < 2);
        CHECK(g.row < 2);
    }
}

TEST_CASE("gap junction degrees on a small grid")
{
    const auto t = build_network(small_grid(6));
    const auto d = degrees(t);
    CHECK(t.astrocyte_side == 3);
    CHECK(d.at(0) == 2);
    CHECK(d.at(1) == 3);
    CHECK(d.at(4) == 4);
    CHECK(t.gap_junctions.size() == 12);
    const auto nb = t.gap_neighbors();
    CHECK(nb[4] == std::vector<std::uint32_t>{1, 3, 5, 7});
}

TEST_CASE("topology is a function of the seed")
{
    CHECK(build_network(small_grid(8, 3)) == build_network(small_grid(8, 3)));
    CHECK_FALSE(build_network(small_grid(8, 3)) == build_network(small_grid(8, 4)));
}

TEST_CASE("invalid network parameters")
{
    NetworkParams p;
    p.n_neurons = 1000; // not a square
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.n_astrocytes = 100; // not one per 2x2 block
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.lambda = 0.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("broken topology is detected")
{
    const auto p = small_grid(6);
    auto t = build_network(p);
    t.synapses.pop_back();
    CHECK_THROWS_AS(check_topology(t, p), std::logic_error);
    t = build_network(p);
    t.gap_junctions.pop_back();
    CHECK_THROWS_AS(check_topology(t, p), std::logic_error);
}

TEST_CASE("gap-junction coupling")
{
    const AstrocyteParams p;
    SUBCASE("uniform field")
    {
        const auto t = build_network(small_grid(6));
        std::vector<AstrocyteState> states(t.n_astrocytes(), {0.7, 0.1, 0.8});
        const auto c = astro_coupling_terms(states, t, p);
        for (double v : c.d_ip3) CHECK(v == 0.0);
        for (double v : c.d_ca) CHECK(v == 0.0);
    }
    SUBCASE("two astrocytes")
    {
        const std::vector<std::vector<std::uint32_t>> nb{{1}, {0}};
        const std::vector<AstrocyteState> states{{1.0, 0.2, 0.5}, {0.0, 0.0, 0.5}};
        const auto c = astro_coupling_terms(states, nb, p);
        CHECK(c.d_ip3[0] == doctest::Approx(-0.1));
        CHECK(c.d_ip3[1] == doctest::Approx(0.1));
        CHECK(c.d_ca[0] == doctest::Approx(-0.05 * 0.2));
        CHECK(c.d_ca[1] == doctest::Approx(0.05 * 0.2));
    }
    SUBCASE("exchange is conservative")
    {
        const auto t = build_network(small_grid(10));
        std::vector<AstrocyteState> states;
        for (std::size_t i = 0; i < t.n_astrocytes(); ++i) {
            states.push_back({std::sin(double(i)) + 1.5, 0.1 * double(i % 7), 0.5});
        }
        const auto c = astro_coupling_terms(states, t, p);
        double s1 = 0.0, s2 = 0.0, mag = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            s1 += c.d_ip3[i];
            s2 += c.d_ca[i];
            mag += std::abs(c.d_ip3[i]);
        }
        CHECK(mag > 0.0);
        CHECK(std::abs(s1) < 1e-12);
        CHECK(std::abs(s2) < 1e-12);
    }
}

TEST_CASE("rate computation")
{
    RasterData r;
    r.duration = 2.0;
    r.is_target = {true};
    SUBCASE("empty raster")
    {
        const auto s = compute_rates(r, {0.0, 1.0, "w"});
        CHECK(s.target_rate == 0.0);
        CHECK(s.non_target_rate == 0.0);
        CHECK(s.separation_ratio == 1.0);
    }
    SUBCASE("ten spikes in one second")
    {
        for (int i = 0; i < 10; ++i) r.spikes.push_back({0, 0.05 + 0.1 * i});
        r.spikes.push_back({0, 1.5});
        const auto s = compute_rates(r, {0.0, 1.0, "w"});
        CHECK(s.target_rate == doctest::Approx(10.0));
        CHECK(s.per_neuron.at(0) == doctest::Approx(10.0));
        CHECK(std::isinf(s.separation_ratio));
    }
    SUBCASE("two groups")
    {
        r.is_target = {true, false, false};
        r.spikes = {{0, 0.1}, {0, 0.2}, {0, 0.3}, {0, 0.4}, {1, 0.5}, {2, 0.6}, {2, 1.0}};
        const auto s = compute_rates(r, {0.0, 1.0, "w"});
        CHECK(s.target_rate == doctest::Approx(4.0));
        CHECK(s.non_target_rate == doctest::Approx(1.0));
        CHECK(s.separation_ratio == doctest::Approx(4.0));
    }
    CHECK_THROWS_AS(compute_rates(r, {1.0, 1.0, "w"}), std::invalid_argument);
}

TEST_CASE("protocol windows and presets")
{
    ProtocolSpec p;
    const auto w = protocol_windows(p);
    REQUIRE(w.size() == 3);
    CHECK(w[0].t0 == 0.0);
    CHECK(w[0].t1 == doctest::Approx(0.2));
    CHECK(w[1].t1 == doctest::Approx(3.0));
    CHECK(w[2].t1 == doctest::Approx(4.0));
    CHECK(p.duration() == doctest::Approx(4.0));

    const auto t = build_network(NetworkParams{});
    const auto strong = wm_preset(WmPreset::strong, t);
    CHECK(strong.eta == 1.0);
    CHECK_FALSE(strong.cue_enabled);
    CHECK(strong.target_set.size() == 36);
    CHECK(wm_preset(WmPreset::weak, t).eta == 0.25);
    CHECK(wm_preset(WmPreset::none, t).eta == 0.0);
    CHECK(parse_wm_preset("wm-weak") == WmPreset::weak);
    CHECK_THROWS_AS(parse_wm_preset("wm-medium"), std::invalid_argument);

    // Default target set is a 6x6 patch covering whole astrocyte domains.
    std::set<std::uint32_t> astros;
    for (auto n : strong.target_set) astros.insert(t.astrocyte_of[n]);
    CHECK(astros.size() == 9);
}

TEST_CASE("small network run")
{
    const auto np = small_grid(8, 5);
    const auto t = build_network(np);
    ProtocolSpec spec;
    spec.t_stim = 0.1;
    spec.t_delay = 0.3;
    spec.t_recall = 0.1;
    spec.target_set = grid_patch(t, 2, 2, 4);
    spec.seed = 9;
    const auto a = run_protocol(t, spec);
    const auto b = run_protocol(t, spec);
    CHECK(a == b);
    CHECK_FALSE(a.spikes.empty());
    CHECK(a.min_astro_state >= -1e-9);
    CHECK(a.max_coupling_imbalance < 1e-9);
    CHECK(std::is_sorted(a.spikes.begin(), a.spikes.end(),
                         [](const SpikeEvent& x, const SpikeEvent& y) { return x.time < y.time; }));
    const auto stim = compute_rates(a, protocol_windows(spec)[0]);
    CHECK(stim.target_rate > stim.non_target_rate);

    spec.seed = 10;
    CHECK_FALSE(run_protocol(t, spec) == a);
}

TEST_CASE("protocol validation")
{
    const auto t = build_network(small_grid(6));
    ProtocolSpec spec;
    CHECK_THROWS_AS(validate(spec, t), std::invalid_argument);
    spec.target_set = {0, 1, 999};
    CHECK_THROWS_AS(validate(spec, t), std::invalid_argument);
    spec.target_set = {0, 1};
    CHECK_NOTHROW(validate(spec, t));
    CHECK_THROWS_AS(grid_patch(t, 4, 4, 4), std::invalid_argument);
}
