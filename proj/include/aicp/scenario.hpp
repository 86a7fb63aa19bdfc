#pragma once

#include <string>
#include <vector>

#include "aicp/netsim.hpp"

namespace aicp {

/// Simulation scenario as read from a JSON file. Absent keys fall back to the
/// reference defaults; unknown keys are rejected.
struct Scenario {
    SimConfig config;
    std::vector<FilterType> filters{FilterType::Cmr, FilterType::HopDis,
                                    FilterType::Hop};
    std::string metrics_csv = "metrics_{filter}.csv";
    std::string cdf_csv = "cdf_{filter}.csv";
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

FilterType filter_from_name(const std::string& name);

/// Replaces every "{filter}" placeholder in an output path.
std::string resolve_output_path(const std::string& pattern, FilterType f);

}  // namespace aicp
