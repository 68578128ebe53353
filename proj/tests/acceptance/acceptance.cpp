// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero on any
// failure not listed as known.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "astrosyn/config.hpp"
#include "astrosyn/dynamics.hpp"
#include "astrosyn/experiment.hpp"
#include "astrosyn/network.hpp"
#include "astrosyn/reduced_model.hpp"
#include "astrosyn/stability.hpp"
#include "astrosyn/tripartite.hpp"

using namespace astrosyn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit; // s
    std::function<Outcome()> run;
    // Non-empty when the criterion cannot be met by the published model; the
    // line still reports FAIL but does not fail the suite.
    std::string known_failure = {};
};

std::string fmt(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

bool rel_close(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

bool eig_close(std::complex<double> got, std::complex<double> want, double rel)
{
    return std::abs(got - want) <= rel * std::abs(want);
}

std::string eig_text(const Eigenvalues& l)
{
    std::string s;
    for (const auto& v : l) s += fmt("%s%.5g%+.5gi", s.empty() ? "" : ", ", v.real(), v.imag());
    return s;
}

// Closed-form bound constants written out from the parameter table.
double oracle_mu1(double a_glu) { return 0.16 + (1.0 / 0.14) * (0.3 + a_glu); }
double oracle_mu2() { return (0.2 + 2.0 * (6.0 - 0.11)) / (0.5 + 0.11 * (1.0 + 0.185)); }

double oracle_i_astro(double x2)
{
    const double y = x2 * 1000.0 - 196.69;
    return y > 1.0 ? 2.11 * std::log(y) : 0.0;
}
double oracle_i_astro_smooth(double x2) { return 6.3611 * std::tanh(14.682 * x2 - 3.3582) + 6.3611; }

Outcome unforced_equilibrium()
{
    const AstrocyteParams p;
    const auto x = find_equilibrium(p, 0.0, {0.5, 0.1, 0.9});
    const bool ok = rel_close(x.x1, 0.6858, 1e-3) && rel_close(x.x2, 0.06612, 1e-3) && rel_close(x.x3, 0.8882, 1e-3);
    return {ok, fmt("x* = (%.6g, %.6g, %.6g)", x.x1, x.x2, x.x3)};
}

Outcome unforced_eigenvalues()
{
    const AstrocyteParams p;
    const auto x = find_equilibrium(p, 0.0, {0.5, 0.1, 0.9});
    const auto l = eigenvalues(jacobian(p, x, 0.0));
    const bool close = eig_close(l[0], -4.2324, 0.05) && eig_close(l[1], {-0.12, -0.023}, 0.05)
                       && eig_close(l[2], {-0.12, 0.023}, 0.05);
    const bool negative = std::all_of(l.begin(), l.end(), [](auto v) { return v.real() < 0.0; });
    return {close && negative, "lambda = " + eig_text(l)};
}

Outcome forced_equilibrium()
{
    const AstrocyteParams p;
    const auto x = find_equilibrium(p, 5.0, {30.0, 0.4, 0.7});
    const bool eq = rel_close(x.x1, 36.77, 1e-3) && rel_close(x.x2, 0.4061, 1e-3) && rel_close(x.x3, 0.7165, 1e-3);
    const auto l = eigenvalues(jacobian(p, x, 5.0));
    const bool eig = eig_close(l[0], {-0.27, -0.89}, 0.05) && eig_close(l[1], {-0.27, 0.89}, 0.05)
                     && eig_close(l[2], -0.14, 0.05);
    return {eq && eig, fmt("x* = (%.6g, %.6g, %.6g); lambda = ", x.x1, x.x2, x.x3) + eig_text(l)};
}

Outcome ultimate_boundedness()
{
    const AstrocyteParams p;
    const auto b = ultimate_bound(p, 5.0);
    const bool formulas = rel_close(b.mu1, oracle_mu1(5.0), 1e-12) && rel_close(b.mu2, oracle_mu2(), 1e-12)
                          && rel_close(b.mu1, 38.02, 1e-3) && rel_close(b.mu2, 19.01, 1e-3);
    BoundednessOptions o;
    o.horizon = 120.0;
    o.settle_fraction = 0.5;
    o.initial_scale = 3.0;
    const auto v = check_ultimate_boundedness(p, 5.0, 100, 20240601, o);
    return {formulas && v.pass && v.trials == 100,
            fmt("mu1 = %.5g, mu2 = %.5g; %zu trials, worst settle %.3g s, overshoot after 60 s %.3g", b.mu1, b.mu2,
                v.trials, v.worst_settle_time, v.worst_overshoot)};
}

Outcome positivity()
{
    const AstrocyteParams p;
    PropertyCheckOptions o;
    o.tolerance = 1e-9;
    const auto v = check_positivity(p, {}, 100, 20240602, o);
    return {v.pass && v.trials == 100 && v.min_value >= -1e-9,
            fmt("%zu trials, random inputs in [0, %.3g], min state %.3g", v.trials, p.a_glu, v.min_value)};
}

Outcome case2_vs_case3()
{
    const auto strong = simulate_extended(extended_preset(ExtendedPreset::case2));
    const auto weak = simulate_extended(extended_preset(ExtendedPreset::case3));
    bool identical = strong.size() == weak.size();
    double weak_max = -1e300;
    for (std::size_t k = 0; identical && k < strong.size(); ++k) {
        for (std::size_t i = 0; i < 3; ++i) identical = identical && strong.samples[k][i] == weak.samples[k][i];
        weak_max = std::max(weak_max, weak.samples[k][3]);
    }
    const double s = strong.samples.back()[3];
    const double w = weak.samples.back()[3];
    const bool ok = identical && s >= 10.0 * w && weak_max < 5.0;
    return {ok, fmt("astrocyte traces %s; steady x4 %.4g Hz vs %.4g Hz (x%.3g); weak max %.3g Hz",
                    identical ? "bitwise identical" : "DIFFER", s, w, s / w, weak_max)};
}

Outcome tripartite_memory()
{
    TripartiteConfig cfg;
    cfg.duration = 6.0;
    cfg.stimulus = pulse_input(100.0, 0.2);
    cfg.stride = 100;
    const auto traj = simulate_tripartite(cfg);
    const auto post = event_times(traj, tri::kPostSpike);
    const auto pre = event_times(traj, tri::kPreSpike);

    TripartiteConfig control = cfg;
    control.stimulus = constant_input(0.0);
    const auto quiet = event_times(simulate_tripartite(control), tri::kPostSpike);

    const double onset = post.empty() ? -1.0 : post.front();
    const bool ok = !post.empty() && onset > 0.2 && onset < 4.0 && quiet.empty();
    return {ok, fmt("pre spikes %zu, post spikes %zu, post onset %.4g s, control post spikes %zu", pre.size(),
                    post.size(), onset, quiet.size())};
}

struct WmRates {
    std::vector<RateSummary> windows; // stimulation, delay, recall
};

WmRates run_wm(const std::string& scenario)
{
    const auto cfg = make_config({{"scenario", scenario}, {"seed", 42}});
    NetworkParams np = cfg.network;
    np.seed = cfg.seed;
    const auto topo = build_network(np);
    check_topology(topo, np);
    const auto protocol = configured_protocol(cfg, topo);
    const auto raster = run_protocol(topo, protocol, cfg.dt, {cfg.neuron, cfg.astrocyte});
    WmRates r;
    for (const auto& w : protocol_windows(protocol)) r.windows.push_back(compute_rates(raster, w));
    return r;
}

Outcome working_memory()
{
    const auto strong = run_wm("wm-strong");
    const auto weak = run_wm("wm-weak");
    const auto none = run_wm("wm-none");
    const auto& sd = strong.windows[1];
    const bool s_ok = sd.separation_ratio >= 5.0 && sd.target_rate >= 75.0 && sd.target_rate <= 250.0;
    const bool w_ok = weak.windows[1].separation_ratio < 2.0 && weak.windows[2].separation_ratio >= 3.0;
    // The stimulation window is driven by the stimulus itself, so the
    // no-gliotransmission bound applies to the delay and recall windows.
    const bool n_ok = none.windows[1].separation_ratio < 1.5 && none.windows[2].separation_ratio < 1.5;
    return {s_ok && w_ok && n_ok,
            fmt("strong delay T=%.4g NT=%.4g ratio=%.3g; weak delay ratio=%.3g recall ratio=%.3g; "
                "none delay ratio=%.3g recall ratio=%.3g (stimulation ratio %.3g)",
                sd.target_rate, sd.non_target_rate, sd.separation_ratio, weak.windows[1].separation_ratio,
                weak.windows[2].separation_ratio, none.windows[1].separation_ratio, none.windows[2].separation_ratio,
                none.windows[0].separation_ratio)};
}

Outcome rk4_order()
{
    const Derivative decay = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
    auto error = [&](double dt) {
        return std::abs(simulate(decay, {}, {1.0}, 1.0, dt).samples.back()[0] - std::exp(-1.0));
    };
    const double e1 = error(0.1), e2 = error(0.05);
    const double ratio = e1 / e2;
    return {ratio >= 14.0 && ratio <= 18.0, fmt("error %.3g -> %.3g, ratio %.4g", e1, e2, ratio)};
}

Outcome smooth_fit()
{
    double worst = 0.0, worst_at = 0.0;
    bool matches_oracle = true;
    const int n = 400000;
    for (int i = 0; i <= n; ++i) {
        const double x2 = 0.3 + 0.4 * i / n;
        const double exact = i_astro(x2), smooth = i_astro_smooth(x2);
        matches_oracle = matches_oracle && std::abs(exact - oracle_i_astro(x2)) <= 1e-12 * (1.0 + std::abs(exact))
                         && std::abs(smooth - oracle_i_astro_smooth(x2)) <= 1e-12 * (1.0 + std::abs(smooth));
        if (const double d = std::abs(smooth - exact); d > worst) {
            worst = d;
            worst_at = x2;
        }
    }
    const double mid = std::abs(i_astro_smooth(0.5) - i_astro(0.5));
    return {matches_oracle && worst <= 2.0 && mid <= 0.5,
            fmt("max |diff| %.4g uA at x2 = %.4g uM; |diff| at 0.5 uM = %.4g uA", worst, worst_at, mid)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "unforced equilibrium", 1.0, unforced_equilibrium},
        {2, "unforced eigenvalues", 1.0, unforced_eigenvalues},
        {3, "forced equilibrium and eigenvalues", 1.0, forced_equilibrium},
        {4, "ultimate bound", 120.0, ultimate_boundedness},
        {5, "positivity", 120.0, positivity},
        {6, "strong vs weak gliotransmission", 30.0, case2_vs_case3},
        {7, "tripartite memory effect", 60.0, tripartite_memory},
        {8, "working-memory signatures", 600.0, working_memory},
        {9, "RK4 convergence order", 1.0, rk4_order},
        {10, "smooth current fit", 1.0, smooth_fit,
         "the published fit constants give |diff| = 0.66 uA at x2 = 0.5 uM; see README"},
    };

    int failures = 0;
    int known = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.time_limit;
        const bool pass = o.pass && in_time;
        const bool expected = !pass && !c.known_failure.empty() && in_time;
        failures += !pass && !expected;
        known += expected;
        std::printf("[%s] %2d %s: %s | %.3f s (limit %.0f s)%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.c_str(), secs, c.time_limit, in_time ? "" : " TOO SLOW",
                    expected ? (" [known: " + c.known_failure + "]").c_str() : "");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed, %d known failure(s), %d unexpected failure(s)\n",
                static_cast<int>(criteria.size()) - failures - known, criteria.size(), known, failures);
    return failures == 0 ? 0 : 1;
}
