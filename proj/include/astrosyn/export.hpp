// CSV / JSON writers for trajectories, rasters and plot-ready data.
//
// CSV files are UTF-8, comma separated, with a header row whose column names
// carry units in parentheses. Reals are written with 17 significant digits.
#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "astrosyn/dynamics.hpp"
#include "astrosyn/network.hpp"
#include "astrosyn/reduced_model.hpp"

namespace astrosyn {

class ExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 17 significant digits; parses back to within 1e-12 relative.
std::string format_real(double value);

struct Column {
    std::string name;
    std::string unit;

    std::string header() const { return unit.empty() ? name : name + " (" + unit + ")"; }
};

// Writes `path` with a "t (s)" column followed by `columns` (one per state
// component), keeping every `stride`-th sample. When the trajectory carries
// events they go to a sidecar "<stem>_events.csv". Returns the written files.
std::vector<std::filesystem::path> export_timeseries(const Trajectory& traj, const std::vector<Column>& columns,
                                                     const std::filesystem::path& path, std::size_t stride = 1);

// Events sidecar file name for a time-series path.
std::filesystem::path events_path(const std::filesystem::path& timeseries);

// Parses a file written by export_timeseries back into header + rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_numeric_csv(const std::filesystem::path& path);

// neuron_id,time (s),group
std::filesystem::path export_spikes(const RasterData& raster, const std::filesystem::path& path);

// t (s), then one x2 column per astrocyte.
std::filesystem::path export_astro_traces(const RasterData& raster, const std::filesystem::path& path);

nlohmann::json rates_to_json(const std::vector<RateSummary>& summaries);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

// Results that can be turned into plot data.
struct TraceResult {
    enum class Source { tripartite, extended } source;
    Trajectory trajectory;
    AstroCurrentModel current = AstroCurrentModel::smooth; // extended model only
};

struct NetworkResult {
    RasterData raster;
    ProtocolSpec protocol;
};

using PlotSource = std::variant<TraceResult, NetworkResult>;

enum class PlotKind { traces, raster, rates };

PlotKind parse_plot_kind(const std::string& name);
std::string to_string(PlotKind kind);

// Bin width for rate panels.
inline constexpr double kRateBin = 0.05; // s

// Writes columnar files plus "<kind>_plot.json", a small declarative manifest
// (files, axes, labels, groups). Throws ExportError when `kind` does not fit
// the result: traces need a TraceResult, raster/rates a NetworkResult.
std::vector<std::filesystem::path> emit_plotdata(const PlotSource& result, PlotKind kind,
                                                 const std::filesystem::path& dir);

// Spike counts per bin divided by the bin width.
std::vector<double> binned_rate(const std::vector<double>& spike_times, double duration, double bin);

} // namespace astrosyn
