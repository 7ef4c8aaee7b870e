#pragma once

#include <filesystem>

#include <json.hpp>

#include "multicoap/simgen.hpp"
#include "multicoap/types.hpp"

// JSON forms of FitConfig and SimConfig. Readers reject unknown keys and
// wrongly typed values with ConfigError; missing keys keep their defaults.

namespace multicoap::config {

using Json = nlohmann::ordered_json;

Json to_json(const FitConfig& config);
Json to_json(const SimConfig& config);

/// "qs" may be a list or a single integer, which is broadcast to every study
/// once the study count is known (see resolve_qs).
FitConfig fit_config_from_json(const Json& j);
SimConfig sim_config_from_json(const Json& j);

/// Expands a single-entry qs to num_studies entries.
void resolve_qs(FitConfig& config, std::size_t num_studies);

/// Parses a file; a run manifest is accepted too, in which case its "config"
/// member is returned.
Json read_config_file(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace multicoap::config
