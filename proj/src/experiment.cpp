#include "astrosyn/experiment.hpp"

#include <cmath>
#include <sstream>

#include "astrosyn/export.hpp"
#include "astrosyn/network.hpp"
#include "astrosyn/reduced_model.hpp"
#include "astrosyn/tripartite.hpp"

namespace astrosyn {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json real_or_string(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json state_json(const AstrocyteState& x) { return {{"x1", x.x1}, {"x2", x.x2}, {"x3", x.x3}}; }

void append(std::vector<fs::path>& files, const std::vector<fs::path>& more, const fs::path& dir)
{
    for (const auto& f : more) files.push_back(f.lexically_relative(dir));
}

ExperimentResult run_extended(const ExperimentConfig& cfg, const fs::path& dir)
{
    ExtendedConfig ec = extended_preset(parse_extended_preset(cfg.scenario), cfg.astrocyte, cfg.firing_rate);
    ec.duration = cfg.duration;
    ec.dt = cfg.dt;
    ec.current = cfg.current;
    ec.stride = cfg.exports.stride;
    const Trajectory traj = simulate_extended(ec);

    // Export the state together with the current that drives x4.
    Trajectory augmented = traj;
    for (auto& s : augmented.samples) s.push_back(astro_current(s[1], cfg.current));

    ExperimentResult result;
    append(result.files,
           export_timeseries(augmented,
                             {{"x1", "uM"}, {"x2", "uM"}, {"x3", ""}, {"x4", "Hz"}, {"I_astro", "uA"}},
                             dir / "trajectory.csv"),
           dir);
    if (cfg.exports.plotdata) {
        append(result.files,
               emit_plotdata(TraceResult{TraceResult::Source::extended, traj, cfg.current}, PlotKind::traces,
                             dir / "plotdata"),
               dir);
    }
    const auto& last = traj.samples.back();
    result.summary = {{"final_x2", last[1]}, {"final_x4", last[3]}, {"eta", ec.rate.eta}};
    return result;
}

ExperimentResult run_tripartite(const ExperimentConfig& cfg, const fs::path& dir)
{
    TripartiteConfig tc;
    tc.stimulus = cfg.tripartite.persistent ? constant_input(cfg.tripartite.stim_amplitude)
                                            : pulse_input(cfg.tripartite.stim_amplitude, cfg.tripartite.stim_duration);
    tc.duration = cfg.duration;
    tc.dt = cfg.dt;
    tc.eta = cfg.tripartite.eta;
    tc.pre = cfg.neuron;
    tc.pre.is_excitatory = true;
    tc.post = cfg.neuron;
    tc.astro = cfg.astrocyte;
    tc.jglu = cfg.jglu;
    tc.stride = cfg.exports.stride;
    const Trajectory traj = simulate_tripartite(tc);

    ExperimentResult result;
    append(result.files,
           export_timeseries(traj,
                             {{"V_pre", "mV"}, {"U_pre", "mV"}, {"G_pre", "uM"}, {"x1", "uM"}, {"x2", "uM"},
                              {"x3", ""}, {"V_post", "mV"}, {"U_post", "mV"}, {"G_post", "uM"}},
                             dir / "trajectory.csv"),
           dir);
    if (cfg.exports.plotdata) {
        append(result.files,
               emit_plotdata(TraceResult{TraceResult::Source::tripartite, traj}, PlotKind::traces, dir / "plotdata"),
               dir);
    }
    result.summary = {{"pre_spikes", event_times(traj, tri::kPreSpike).size()},
                      {"post_spikes", event_times(traj, tri::kPostSpike).size()},
                      {"max_x2", [&] {
                           double m = 0.0;
                           for (double v : traj.component(tri::kX2)) m = std::max(m, v);
                           return m;
                       }()}};
    return result;
}

ExperimentResult run_network(const ExperimentConfig& cfg, const fs::path& dir)
{
    NetworkParams np = cfg.network;
    np.seed = cfg.seed;
    const NetworkTopology topo = build_network(np);
    check_topology(topo, np);
    const ProtocolSpec protocol = configured_protocol(cfg, topo);
    const RasterData raster = run_protocol(topo, protocol, cfg.dt, {cfg.neuron, cfg.astrocyte});

    std::vector<RateSummary> rates;
    for (const auto& w : protocol_windows(protocol)) rates.push_back(compute_rates(raster, w));

    ExperimentResult result;
    result.files.push_back(export_spikes(raster, dir / "spikes.csv").lexically_relative(dir));
    write_json(rates_to_json(rates), dir / "rates.json");
    result.files.push_back("rates.json");
    result.files.push_back(export_astro_traces(raster, dir / "astro_traces.csv").lexically_relative(dir));
    if (cfg.exports.plotdata) {
        const NetworkResult nr{raster, protocol};
        append(result.files, emit_plotdata(nr, PlotKind::raster, dir / "plotdata"), dir);
        append(result.files, emit_plotdata(nr, PlotKind::rates, dir / "plotdata"), dir);
    }
    json phases = json::object();
    for (const auto& r : rates) {
        phases[r.window.name] = {{"target_hz", r.target_rate},
                                 {"non_target_hz", r.non_target_rate},
                                 {"separation_ratio", real_or_string(r.separation_ratio)}};
    }
    result.summary = {{"spikes", raster.spikes.size()}, {"phases", phases}};
    return result;
}

ExperimentResult run_stability(const ExperimentConfig& cfg, const fs::path& dir)
{
    const ReportOptions options{cfg.stability_trials, cfg.seed};
    json reports = json::array();
    for (const auto& [u, guess] : {std::pair{0.0, AstrocyteState{0.5, 0.1, 0.9}},
                                   std::pair{cfg.astrocyte.a_glu, AstrocyteState{30.0, 0.4, 0.7}}}) {
        reports.push_back(report_to_json(stability_report(cfg.astrocyte, u, guess, options)));
    }
    json warnings = json::array();
    for (const auto& w : analysis_warnings(cfg.astrocyte)) warnings.push_back(w);

    ExperimentResult result;
    write_json({{"reports", reports}, {"warnings", warnings}}, dir / "stability_report.json");
    result.files.push_back("stability_report.json");
    result.summary = {{"reports", reports.size()}, {"warnings", warnings}};
    for (std::size_t i = 0; i < reports.size(); ++i) {
        result.summary["stable_" + std::to_string(i)] = reports[i]["locally_stable"];
    }
    return result;
}

std::string manifest_text(const ExperimentConfig& cfg, const std::vector<fs::path>& files)
{
    json doc = cfg.document;
    doc.erase("output_dir"); // location only; keeps manifests of identical runs identical
    std::ostringstream out;
    out << "astrosyn " << kVersion << '\n';
    out << "scenario: " << cfg.scenario << '\n';
    out << "seed: " << cfg.seed << '\n';
    out << "config: " << doc.dump() << '\n';
    out << "files:\n";
    for (const auto& f : files) out << "  " << f.generic_string() << '\n';
    return out.str();
}

} // namespace

ProtocolSpec configured_protocol(const ExperimentConfig& cfg, const NetworkTopology& topo)
{
    ProtocolSpec p = cfg.protocol;
    p.seed = cfg.seed;
    p.jglu = cfg.jglu;
    const auto& patch = cfg.target_patch;
    if (patch.col || patch.row || patch.size != 6) {
        std::size_t col = patch.col.value_or(0);
        std::size_t row = patch.row.value_or(0);
        if (!patch.col || !patch.row) {
            const std::size_t centre = topo.neuron_side > patch.size ? (topo.neuron_side - patch.size) / 2 : 0;
            if (!patch.col) col = centre;
            if (!patch.row) row = centre;
        }
        if (col + patch.size > topo.neuron_side || row + patch.size > topo.neuron_side) {
            throw ConfigError("protocol.target_patch", "patch does not fit inside the "
                                                           + std::to_string(topo.neuron_side) + "x"
                                                           + std::to_string(topo.neuron_side) + " neuron grid");
        }
        p.target_set = grid_patch(topo, col, row, patch.size);
    } else {
        p.target_set = default_target_set(topo);
    }
    validate(p, topo);
    return p;
}

json report_to_json(const StabilityReport& r)
{
    json jac = json::array();
    for (const auto& row : r.jacobian) jac.push_back(json(std::vector<double>(row.begin(), row.end())));
    json eig = json::array();
    for (const auto& l : r.eigenvalues) eig.push_back({{"re", l.real()}, {"im", l.imag()}});

    json pos = {{"pass", r.positivity.pass}, {"trials", r.positivity.trials}, {"min_value", r.positivity.min_value}};
    if (r.positivity.counterexample_initial) {
        pos["counterexample"] = {{"initial", state_json(*r.positivity.counterexample_initial)},
                                 {"time", r.positivity.counterexample_time},
                                 {"trial", r.positivity.counterexample_trial}};
    }
    json bnd = {{"pass", r.boundedness.pass},
                {"trials", r.boundedness.trials},
                {"worst_settle_time", r.boundedness.worst_settle_time},
                {"worst_overshoot", r.boundedness.worst_overshoot}};
    if (r.boundedness.counterexample_initial) {
        bnd["counterexample"] = {{"initial", state_json(*r.boundedness.counterexample_initial)},
                                 {"trial", r.boundedness.counterexample_trial}};
    }
    return {{"input_level", r.input_level},
            {"equilibrium", state_json(r.equilibrium)},
            {"residual", r.residual},
            {"jacobian", jac},
            {"eigenvalues", eig},
            {"eigen_residual", r.eigen_residual},
            {"locally_stable", r.locally_stable},
            {"bound", {{"mu1", r.bound.mu1}, {"mu2", r.bound.mu2}, {"x3_max", r.bound.x3_max}}},
            {"positivity", pos},
            {"boundedness", bnd}};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    const fs::path dir = cfg.output_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ExportError("cannot create output directory '" + dir.string() + "': " + ec.message());

    const std::string& s = cfg.scenario;
    ExperimentResult result;
    if (s == "case1" || s == "case2" || s == "case3" || s == "pulse") {
        result = run_extended(cfg, dir);
    } else if (s == "tripartite-short" || s == "tripartite-persistent") {
        result = run_tripartite(cfg, dir);
    } else if (s.rfind("wm-", 0) == 0) {
        result = run_network(cfg, dir);
    } else if (s == "stability-report") {
        result = run_stability(cfg, dir);
    } else {
        throw ConfigError("scenario", "unknown scenario '" + s + "'");
    }
    result.files.push_back("manifest.txt");
    write_text(manifest_text(cfg, result.files), dir / "manifest.txt");
    return result;
}

} // namespace astrosyn
