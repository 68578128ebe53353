#include "astrosyn/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "astrosyn/reduced_model.hpp"
#include "astrosyn/tripartite.hpp"

namespace astrosyn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_output(const fs::path& path)
{
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExportError("cannot write '" + path.string() + "'");
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path)
{
    out.close();
    if (!out) throw ExportError("failed while writing '" + path.string() + "'");
}

std::string axis_label(const Column& c) { return c.header(); }

} // namespace

std::string format_real(double value)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    if (ec != std::errc{}) throw ExportError("format_real: conversion failed");
    return std::string(buf, end);
}

fs::path events_path(const fs::path& timeseries)
{
    fs::path p = timeseries;
    p.replace_filename(timeseries.stem().string() + "_events.csv");
    return p;
}

std::vector<fs::path> export_timeseries(const Trajectory& traj, const std::vector<Column>& columns,
                                        const fs::path& path, std::size_t stride)
{
    if (stride == 0) throw ExportError("export_timeseries: stride must be >= 1");
    if (traj.dimension() != columns.size()) {
        throw ExportError("export_timeseries: " + std::to_string(columns.size()) + " column names for "
                          + std::to_string(traj.dimension()) + " state components");
    }
    std::vector<fs::path> written;
    {
        auto out = open_output(path);
        out << "t (s)";
        for (const auto& c : columns) out << ',' << c.header();
        out << '\n';
        for (std::size_t i = 0; i < traj.size(); i += stride) {
            out << format_real(traj.times[i]);
            for (double v : traj.samples[i]) out << ',' << format_real(v);
            out << '\n';
        }
        close_checked(out, path);
        written.push_back(path);
    }
    if (!traj.events.empty()) {
        const fs::path side = events_path(path);
        auto out = open_output(side);
        out << "time (s),event\n";
        for (const auto& e : traj.events) out << format_real(e.time) << ',' << e.tag << '\n';
        close_checked(out, side);
        written.push_back(side);
    }
    return written;
}

CsvTable read_numeric_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ExportError("cannot read '" + path.string() + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) return table;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{}) throw ExportError("non-numeric cell '" + cell + "' in " + path.string());
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

fs::path export_spikes(const RasterData& raster, const fs::path& path)
{
    auto out = open_output(path);
    out << "neuron_id,time (s),group\n";
    for (const auto& s : raster.spikes) {
        out << s.neuron << ',' << format_real(s.time) << ',' << (raster.is_target[s.neuron] ? "target" : "non-target")
            << '\n';
    }
    close_checked(out, path);
    return path;
}

fs::path export_astro_traces(const RasterData& raster, const fs::path& path)
{
    auto out = open_output(path);
    out << "t (s)";
    const std::size_t na = raster.ca_traces.empty() ? 0 : raster.ca_traces.front().size();
    for (std::size_t a = 0; a < na; ++a) out << ",x2_astro" << a << " (uM)";
    out << '\n';
    for (std::size_t i = 0; i < raster.trace_times.size(); ++i) {
        out << format_real(raster.trace_times[i]);
        for (double v : raster.ca_traces[i]) out << ',' << format_real(v);
        out << '\n';
    }
    close_checked(out, path);
    return path;
}

json rates_to_json(const std::vector<RateSummary>& summaries)
{
    json arr = json::array();
    for (const auto& s : summaries) {
        json ratio = std::isfinite(s.separation_ratio) ? json(s.separation_ratio) : json("inf");
        arr.push_back({{"window", s.window.name},
                       {"t0_s", s.window.t0},
                       {"t1_s", s.window.t1},
                       {"target_rate_hz", s.target_rate},
                       {"non_target_rate_hz", s.non_target_rate},
                       {"separation_ratio", ratio}});
    }
    return arr;
}

void write_json(const json& doc, const fs::path& path)
{
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    close_checked(out, path);
}

void write_text(const std::string& text, const fs::path& path)
{
    auto out = open_output(path);
    out << text;
    close_checked(out, path);
}

PlotKind parse_plot_kind(const std::string& name)
{
    if (name == "traces") return PlotKind::traces;
    if (name == "raster") return PlotKind::raster;
    if (name == "rates") return PlotKind::rates;
    throw ExportError("unknown plot kind '" + name + "'");
}

std::string to_string(PlotKind kind)
{
    switch (kind) {
    case PlotKind::traces: return "traces";
    case PlotKind::raster: return "raster";
    case PlotKind::rates: return "rates";
    }
    return "?";
}

std::vector<double> binned_rate(const std::vector<double>& spike_times, double duration, double bin)
{
    const auto n = static_cast<std::size_t>(std::ceil(duration / bin - 1e-9));
    std::vector<double> out(n, 0.0);
    for (double t : spike_times) {
        auto idx = static_cast<std::size_t>(t / bin);
        if (idx >= n && n > 0) idx = n - 1;
        if (idx < n) out[idx] += 1.0;
    }
    for (auto& v : out) v /= bin;
    return out;
}

namespace {

// Two-column file (x, y) with a header.
fs::path write_xy(const fs::path& path, const Column& x, const Column& y, const std::vector<double>& xs,
                  const std::vector<double>& ys)
{
    auto out = open_output(path);
    out << x.header() << ',' << y.header() << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) out << format_real(xs[i]) << ',' << format_real(ys[i]) << '\n';
    close_checked(out, path);
    return path;
}

json panel(const std::string& file, const Column& x, const Column& y, const std::string& title)
{
    return {{"file", file}, {"x", axis_label(x)}, {"y", axis_label(y)}, {"title", title}};
}

std::vector<fs::path> emit_traces(const TraceResult& r, const fs::path& dir)
{
    std::vector<fs::path> files;
    json panels = json::array();
    const Column time{"t", "s"};
    const double duration = r.trajectory.times.empty() ? 0.0 : r.trajectory.times.back();

    std::vector<double> centres;
    for (std::size_t i = 0; i < binned_rate({}, duration, kRateBin).size(); ++i) {
        centres.push_back((static_cast<double>(i) + 0.5) * kRateBin);
    }

    if (r.source == TraceResult::Source::tripartite) {
        const Column rate{"rate", "Hz"};
        const Column ca{"x2", "uM"};
        files.push_back(write_xy(dir / "pre_rate.csv", time, rate, centres,
                                 binned_rate(event_times(r.trajectory, tri::kPreSpike), duration, kRateBin)));
        panels.push_back(panel("pre_rate.csv", time, rate, "presynaptic firing frequency"));
        files.push_back(write_xy(dir / "astro_ca.csv", time, ca, r.trajectory.times, r.trajectory.component(tri::kX2)));
        panels.push_back(panel("astro_ca.csv", time, ca, "astrocytic Ca2+"));
        files.push_back(write_xy(dir / "post_rate.csv", time, rate, centres,
                                 binned_rate(event_times(r.trajectory, tri::kPostSpike), duration, kRateBin)));
        panels.push_back(panel("post_rate.csv", time, rate, "postsynaptic firing frequency"));
    } else {
        const Column ca{"x2", "uM"};
        const Column current{"I_astro", "uA"};
        const Column rate{"x4", "Hz"};
        const auto x2 = r.trajectory.component(1);
        std::vector<double> i_values;
        for (double v : x2) i_values.push_back(astro_current(v, r.current));
        files.push_back(write_xy(dir / "astro_ca.csv", time, ca, r.trajectory.times, x2));
        panels.push_back(panel("astro_ca.csv", time, ca, "astrocytic Ca2+"));
        files.push_back(write_xy(dir / "astro_current.csv", time, current, r.trajectory.times, i_values));
        panels.push_back(panel("astro_current.csv", time, current, "gliotransmission current"));
        files.push_back(write_xy(dir / "post_rate.csv", time, rate, r.trajectory.times, r.trajectory.component(3)));
        panels.push_back(panel("post_rate.csv", time, rate, "postsynaptic firing rate"));
    }
    const fs::path manifest = dir / "traces_plot.json";
    write_json({{"kind", "traces"}, {"panels", panels}}, manifest);
    files.push_back(manifest);
    return files;
}

json phase_bounds(const ProtocolSpec& protocol)
{
    json out = json::array();
    for (const auto& w : protocol_windows(protocol)) out.push_back({{"name", w.name}, {"t0_s", w.t0}, {"t1_s", w.t1}});
    return out;
}

std::vector<fs::path> emit_raster(const NetworkResult& r, const fs::path& dir)
{
    const fs::path path = dir / "raster.csv";
    {
        auto out = open_output(path);
        out << "t (s),neuron_id,group\n";
        for (const auto& s : r.raster.spikes) {
            out << format_real(s.time) << ',' << s.neuron << ','
                << (r.raster.is_target[s.neuron] ? "target" : "non-target") << '\n';
        }
        close_checked(out, path);
    }
    const fs::path manifest = dir / "raster_plot.json";
    write_json({{"kind", "raster"},
                {"file", "raster.csv"},
                {"x", "t (s)"},
                {"y", "neuron_id"},
                {"groups", {"target", "non-target"}},
                {"phases", phase_bounds(r.protocol)}},
               manifest);
    return {path, manifest};
}

std::vector<fs::path> emit_rates(const NetworkResult& r, const fs::path& dir)
{
    const fs::path path = dir / "rates_table.csv";
    const double duration = r.raster.duration;
    {
        auto out = open_output(path);
        out << "t0 (s),t1 (s),target (Hz),non-target (Hz)\n";
        const auto n = static_cast<std::size_t>(std::ceil(duration / kRateBin - 1e-9));
        for (std::size_t i = 0; i < n; ++i) {
            const double t0 = static_cast<double>(i) * kRateBin;
            const double t1 = std::min(duration, t0 + kRateBin);
            const auto s = compute_rates(r.raster, {t0, t1, ""});
            out << format_real(t0) << ',' << format_real(t1) << ',' << format_real(s.target_rate) << ','
                << format_real(s.non_target_rate) << '\n';
        }
        close_checked(out, path);
    }
    std::vector<RateSummary> phases;
    for (const auto& w : protocol_windows(r.protocol)) phases.push_back(compute_rates(r.raster, w));
    const fs::path manifest = dir / "rates_plot.json";
    write_json({{"kind", "rates"},
                {"file", "rates_table.csv"},
                {"x", "t0 (s)"},
                {"series", {"target (Hz)", "non-target (Hz)"}},
                {"groups", {"target", "non-target"}},
                {"phases", rates_to_json(phases)}},
               manifest);
    return {path, manifest};
}

} // namespace

std::vector<fs::path> emit_plotdata(const PlotSource& result, PlotKind kind, const fs::path& dir)
{
    if (kind == PlotKind::traces) {
        if (const auto* r = std::get_if<TraceResult>(&result)) return emit_traces(*r, dir);
        throw ExportError("plot kind 'traces' needs a trajectory result");
    }
    const auto* r = std::get_if<NetworkResult>(&result);
    if (!r) throw ExportError("plot kind '" + to_string(kind) + "' needs a network result");
    return kind == PlotKind::raster ? emit_raster(*r, dir) : emit_rates(*r, dir);
}

} // namespace astrosyn
