// Scenario dispatch: runs one configured experiment and writes its artifacts.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "astrosyn/config.hpp"
#include "astrosyn/stability.hpp"

namespace astrosyn {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentResult {
    std::vector<std::filesystem::path> files; // relative to the output directory
    nlohmann::json summary;                    // scenario-specific headline numbers
};

// Writes all artifacts plus manifest.txt into cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

nlohmann::json report_to_json(const StabilityReport& report);

// Protocol with the configured target set resolved against a topology.
ProtocolSpec configured_protocol(const ExperimentConfig& cfg, const NetworkTopology& topo);

} // namespace astrosyn
