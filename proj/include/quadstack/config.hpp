#pragma once

#include <filesystem>

#include "quadstack/experiment.hpp"

namespace quadstack {

// Loads an experiment description from YAML. Every field has a default, so a
// partial (or empty) file is fine. Unknown enum strings and malformed values
// raise ConfigError naming the offending key.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& yaml_text,
                                         const std::string& name = "<inline>");

}  // namespace quadstack
