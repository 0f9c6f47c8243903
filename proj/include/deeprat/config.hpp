#pragma once

#include <stdexcept>
#include <string>

#include "deeprat/orchestrator.hpp"

namespace deeprat::harness {

// Path-qualified configuration problem ("file:line: message").
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Loads and fully validates a configuration file. Every ledger default is
// applied for keys that are absent; unknown keys are rejected.
orchestrator::TrainConfig load_config(const std::string& path);
orchestrator::TrainConfig parse_config(const std::string& text,
                                       const std::string& origin = "<string>");

// Canonical emission (file units, full precision). parse(serialize(c))
// reproduces c exactly.
std::string serialize_config(const orchestrator::TrainConfig& cfg);
void save_config(const orchestrator::TrainConfig& cfg, const std::string& path);

}  // namespace deeprat::harness
