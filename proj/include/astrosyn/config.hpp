// Experiment configuration: JSON files with strict key checking, named
// presets, and command-line overrides.
//
// Precedence, lowest first: compiled-in defaults, scenario preset, config
// file, --set overrides, dedicated flags (--scenario, --seed, --out).
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "astrosyn/network.hpp"
#include "astrosyn/reduced_model.hpp"
#include "astrosyn/tripartite.hpp"

namespace astrosyn {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key_path, const std::string& message)
        : std::runtime_error(key_path.empty() ? message : key_path + ": " + message), key_path_(key_path) {}
    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

struct PresetInfo {
    std::string name;
    std::string description;
};

const std::vector<PresetInfo>& preset_catalog();
bool is_preset(const std::string& name);

struct ExportOptions {
    std::size_t stride = 10;
    bool plotdata = true;
};

struct TripartiteOptions {
    double eta = 1.0;
    double stim_amplitude = 100.0;  // uA
    double stim_duration = 0.2;     // s; ignored when persistent
    bool persistent = false;
};

struct TargetPatch {
    std::optional<std::size_t> col;
    std::optional<std::size_t> row;
    std::size_t size = 6;
};

struct ExperimentConfig {
    std::string scenario;
    double dt = kDefaultDt;
    double duration = 60.0;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    ExportOptions exports{};

    NeuronParams neuron{};
    AstrocyteParams astrocyte{};
    FiringRateParams firing_rate{};
    AstroCurrentModel current = AstroCurrentModel::smooth;
    JgluMode jglu{};
    TripartiteOptions tripartite{};
    NetworkParams network{};
    ProtocolSpec protocol{};
    TargetPatch target_patch{};
    std::size_t stability_trials = 100;

    // Final merged document, echoed into the run manifest.
    nlohmann::json document;
};

// Applies --set style "dotted.key=value" onto a JSON document. The value is
// parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

struct CliOverrides {
    std::optional<std::string> scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::vector<std::string> sets;
};

// Reads a config file (JSON). Throws ConfigError on I/O or syntax problems.
nlohmann::json load_config_document(const std::string& path);

// Builds a validated configuration. Unknown keys and type mismatches raise
// ConfigError carrying the offending key path.
ExperimentConfig make_config(nlohmann::json doc, const CliOverrides& overrides = {});

// Non-fatal remarks about a valid configuration.
std::vector<std::string> config_warnings(const ExperimentConfig& cfg);

} // namespace astrosyn
