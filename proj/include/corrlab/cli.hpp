#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "corrlab/json_io.hpp"

namespace corrlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the `corrlab` tool and the tests. `args` excludes
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64 of the canonical dump of the config with `workers` and `out`
/// removed (neither can change a result).
std::uint64_t config_hash(const Json& effective_config);
std::string hex(std::uint64_t v);

/// Runs one experiment from a fully merged config and returns its report.
/// Throws ConfigError on schema violations.
Json run_experiment(const std::string& experiment, const Json& effective_config);

/// Defaults for an experiment merged with `file_config`; unknown keys throw.
Json effective_config(const std::string& experiment, const Json& file_config);

std::vector<std::string> experiments();

}  // namespace corrlab::cli
