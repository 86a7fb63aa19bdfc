#include "aicp/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aicp {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            throw InvalidConfig("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig("bad value for '" + key + "': " + e.what());
    }
}

}  // namespace

FilterType filter_from_name(const std::string& name) {
    if (name == "cmr") return FilterType::Cmr;
    if (name == "hopdis") return FilterType::HopDis;
    if (name == "hop") return FilterType::Hop;
    throw InvalidConfig("unknown filter '" + name +
                        "' (expected cmr, hopdis or hop)");
}

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("scenario is not valid JSON: ") +
                            e.what());
    }
    if (!root.is_object()) {
        throw InvalidConfig("scenario root must be a JSON object");
    }
    reject_unknown_keys(root, "scenario",
                        {"area", "duration_s", "beacon_rate_hz",
                         "bit_rate_bps", "tx_power_dbm", "noise_floor_dbm",
                         "antenna", "antenna_pattern", "vehicle_count", "seed",
                         "filters", "cmr", "mobility", "output"});

    Scenario sc;
    SimConfig& cfg = sc.config;

    if (root.contains("area")) {
        const json& area = root.at("area");
        reject_unknown_keys(area, "area", {"width_m", "height_m"});
        cfg.area_width_m = get_or(area, "width_m", cfg.area_width_m);
        cfg.area_height_m = get_or(area, "height_m", cfg.area_height_m);
    }
    cfg.duration_s = get_or(root, "duration_s", cfg.duration_s);
    cfg.beacon_rate_hz = get_or(root, "beacon_rate_hz", cfg.beacon_rate_hz);
    cfg.bit_rate_bps = get_or(root, "bit_rate_bps", cfg.bit_rate_bps);
    cfg.tx_power_dbm = get_or(root, "tx_power_dbm", cfg.tx_power_dbm);
    cfg.noise_floor_dbm = get_or(root, "noise_floor_dbm", cfg.noise_floor_dbm);

    if (root.contains("antenna")) {
        const std::string name = get_or<std::string>(root, "antenna", "");
        if (name == "isotropic") {
            cfg.antenna = AntennaType::Isotropic;
        } else if (name == "front_rear") {
            cfg.antenna = AntennaType::FrontRear;
        } else {
            throw InvalidConfig("unknown antenna '" + name +
                                "' (expected isotropic or front_rear)");
        }
    }
    if (root.contains("antenna_pattern")) {
        const json& pat = root.at("antenna_pattern");
        reject_unknown_keys(pat, "antenna_pattern",
                            {"max_gain_dbi", "min_gain_dbi"});
        cfg.pattern.max_gain_dbi =
            get_or(pat, "max_gain_dbi", cfg.pattern.max_gain_dbi);
        cfg.pattern.min_gain_dbi =
            get_or(pat, "min_gain_dbi", cfg.pattern.min_gain_dbi);
    }

    cfg.vehicle_count = get_or(root, "vehicle_count", cfg.vehicle_count);
    cfg.seed = get_or(root, "seed", cfg.seed);

    if (root.contains("filters")) {
        const json& filters = root.at("filters");
        if (!filters.is_array() || filters.empty()) {
            throw InvalidConfig("'filters' must be a non-empty array");
        }
        sc.filters.clear();
        for (const json& f : filters) {
            if (!f.is_string()) {
                throw InvalidConfig("'filters' entries must be strings");
            }
            sc.filters.push_back(filter_from_name(f.get<std::string>()));
        }
    }

    if (root.contains("cmr")) {
        const json& cmr = root.at("cmr");
        reject_unknown_keys(
            cmr, "cmr",
            {"hop_limit", "direction_threshold_deg", "distance_threshold_m"});
        cfg.cmr.ttl_initial = get_or(cmr, "hop_limit", cfg.cmr.ttl_initial);
        cfg.cmr.direction_threshold_deg =
            get_or(cmr, "direction_threshold_deg",
                   cfg.cmr.direction_threshold_deg);
        cfg.cmr.distance_threshold_m =
            get_or(cmr, "distance_threshold_m", cfg.cmr.distance_threshold_m);
    }

    if (root.contains("mobility")) {
        const json& mob = root.at("mobility");
        reject_unknown_keys(mob, "mobility",
                            {"grid_cols", "grid_rows", "speed_min_mps",
                             "speed_max_mps", "turn_probability"});
        cfg.mobility.grid_cols =
            get_or(mob, "grid_cols", cfg.mobility.grid_cols);
        cfg.mobility.grid_rows =
            get_or(mob, "grid_rows", cfg.mobility.grid_rows);
        cfg.mobility.speed_min_mps =
            get_or(mob, "speed_min_mps", cfg.mobility.speed_min_mps);
        cfg.mobility.speed_max_mps =
            get_or(mob, "speed_max_mps", cfg.mobility.speed_max_mps);
        cfg.mobility.turn_probability =
            get_or(mob, "turn_probability", cfg.mobility.turn_probability);
    }

    if (root.contains("output")) {
        const json& out = root.at("output");
        reject_unknown_keys(out, "output", {"metrics_csv", "cdf_csv"});
        sc.metrics_csv = get_or(out, "metrics_csv", sc.metrics_csv);
        sc.cdf_csv = get_or(out, "cdf_csv", sc.cdf_csv);
    }

    if (sc.filters.size() > 1) {
        for (const std::string* path : {&sc.metrics_csv, &sc.cdf_csv}) {
            if (path->find("{filter}") == std::string::npos) {
                throw InvalidConfig(
                    "output path '" + *path +
                    "' needs a {filter} placeholder when several filters run");
            }
        }
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("cannot open scenario file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string resolve_output_path(const std::string& pattern, FilterType f) {
    std::string out = pattern;
    const std::string placeholder = "{filter}";
    const std::string name = filter_name(f);
    std::size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
        out.replace(pos, placeholder.size(), name);
        pos += name.size();
    }
    return out;
}

}  // namespace aicp
