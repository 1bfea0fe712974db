#pragma once

// Config files (INI-style key/value with sections) and JSON provenance
// serialization for every configurable type.

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "glasd/box_optimizer.hpp"
#include "glasd/robust_losses.hpp"
#include "glasd/sim_harness.hpp"

namespace glasd {

using Json = nlohmann::ordered_json;

/// Keys of the [optimizer] section: s_init, p_init, s_inc, s_dec, p_inc,
/// p_dec, m, c, radius ("dynamic" or a number), max_iters,
/// stagnation_window, epsilon, explore (true/false).
/// Unknown sections or keys raise InvalidArgument.
OptimizerConfig parse_optimizer_config(std::string_view ini_text,
                                       const OptimizerConfig& base = {});
OptimizerConfig load_optimizer_config(const std::filesystem::path& path,
                                      const OptimizerConfig& base = {});

/// Sections [scenario], [structure], [distribution], [contamination] and
/// [optimizer]; see README for the key list.
ScenarioSpec parse_scenario_config(std::string_view ini_text);
ScenarioSpec load_scenario_config(const std::filesystem::path& path);

/// "iqr" -> empty; otherwise a positive number.
std::optional<double> parse_threshold(std::string_view s);

Json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_from_json(const Json& j);

Json to_json(const LossSpec& s);
LossSpec loss_from_json(const Json& j);

Json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const Json& j);

Json run_summary_json(const RunRecord& r);

}  // namespace glasd
