// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfaging/types.hpp"

namespace cfaging {

enum class OutputFormat
{
    CSV,
    JSON
};

/// A full experiment: base network plus what to sweep, which receivers, and where to write.
struct ExperimentSpec
{
    SimConfig base;
    std::size_t n_drops = 500;
    std::vector<double> doppler_sweep{0.0};
    std::vector<System> systems{System::CellFreeLsfd, System::CellFreeMf, System::SmallCell};
    std::vector<PowerMode> power_modes{PowerMode::FullPower};
    std::filesystem::path output_path;
    std::filesystem::path samples_path;
    OutputFormat output_format = OutputFormat::CSV;
    std::size_t workers = 0; // 0: hardware concurrency

    void validate() const
    {
        base.validate();
        if (n_drops < 1)
            throw std::invalid_argument("ExperimentSpec: n_drops must be at least 1");
        if (doppler_sweep.empty())
            throw std::invalid_argument("ExperimentSpec: empty Doppler sweep");
        for (double f : doppler_sweep)
            if (!(f >= 0.0 && f < 0.5))
                throw std::invalid_argument("ExperimentSpec: sweep values must lie in [0, 0.5)");
        if (systems.empty() || power_modes.empty())
            throw std::invalid_argument("ExperimentSpec: no systems or power modes selected");
    }
};

/// Speed of light used by the velocity converter.
inline constexpr double speed_of_light = 299792458.0;

/// f_D T_s for a UE moving at v m/s.
inline double velocity_to_normalized_doppler(double v, double carrier_freq, double sample_time)
{
    if (v < 0.0)
        throw std::domain_error("velocity_to_normalized_doppler: velocity must be non-negative");
    return v * carrier_freq / speed_of_light * sample_time;
}

inline std::string to_string(System s)
{
    switch (s)
    {
    case System::CellFreeLsfd: return "cf-lsfd";
    case System::CellFreeMf: return "cf-mf";
    case System::SmallCell: return "small-cell";
    }
    return "?";
}

inline std::string to_string(PowerMode m) { return m == PowerMode::FullPower ? "full" : "fpc"; }

inline System parse_system(const std::string& s)
{
    if (s == "cf-lsfd" || s == "lsfd")
        return System::CellFreeLsfd;
    if (s == "cf-mf" || s == "mf")
        return System::CellFreeMf;
    if (s == "small-cell" || s == "smallcell" || s == "sc")
        return System::SmallCell;
    throw std::invalid_argument("unknown system '" + s + "'");
}

inline PowerMode parse_power_mode(const std::string& s)
{
    if (s == "full")
        return PowerMode::FullPower;
    if (s == "fpc")
        return PowerMode::FPC;
    throw std::invalid_argument("unknown power mode '" + s + "'");
}

inline OutputFormat parse_format(const std::string& s)
{
    if (s == "csv")
        return OutputFormat::CSV;
    if (s == "json")
        return OutputFormat::JSON;
    throw std::invalid_argument("unknown output format '" + s + "'");
}

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where, std::set<std::string> known)
{
    if (!obj.is_object())
        throw std::invalid_argument("config: '" + where + "' must be an object");
    for (const auto& [key, _] : obj.items())
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" + where + "." + key + "'");
}

inline std::vector<double> number_or_list(const nlohmann::json& v)
{
    if (v.is_number())
        return {v.get<double>()};
    return v.get<std::vector<double>>();
}

} // namespace detail

/// Builds an ExperimentSpec from a JSON document; fields absent from the document keep
/// their defaults. Physical quantities carry their unit in the key name.
inline ExperimentSpec parse_experiment(const nlohmann::json& doc)
{
    using detail::reject_unknown;
    ExperimentSpec spec;
    SimConfig& c = spec.base;
    reject_unknown(doc, "", {"network", "radio", "frame", "mobility", "pilots", "power", "seed", "experiment"});

    bool p_sum_given = false;
    if (doc.contains("network"))
    {
        const auto& n = doc["network"];
        reject_unknown(n, "network", {"num_aps", "num_ues", "area_side_m", "ap_height_m", "ue_height_m", "shadowing",
                                      "shadow_std_db"});
        c.num_aps = n.value("num_aps", c.num_aps);
        c.num_ues = n.value("num_ues", c.num_ues);
        c.area_side = n.value("area_side_m", c.area_side);
        c.ap_height = n.value("ap_height_m", c.ap_height);
        c.ue_height = n.value("ue_height_m", c.ue_height);
        c.shadowing = n.value("shadowing", c.shadowing);
        c.shadow_std_db = n.value("shadow_std_db", c.shadow_std_db);
    }
    if (doc.contains("radio"))
    {
        const auto& r = doc["radio"];
        reject_unknown(r, "radio", {"carrier_freq_ghz", "sample_time_us", "bandwidth_mhz", "noise_power_dbm",
                                    "p_max_dbm", "p_sum_dbm"});
        c.carrier_freq = r.value("carrier_freq_ghz", c.carrier_freq / 1e9) * 1e9;
        c.sample_time = r.value("sample_time_us", c.sample_time / 1e-6) * 1e-6;
        c.bandwidth = r.value("bandwidth_mhz", c.bandwidth / 1e6) * 1e6;
        if (r.contains("noise_power_dbm"))
            c.noise_power = dbm_to_watt(r["noise_power_dbm"].get<double>());
        if (r.contains("p_max_dbm"))
            c.p_max = dbm_to_watt(r["p_max_dbm"].get<double>());
        if (r.contains("p_sum_dbm"))
        {
            c.p_sum = dbm_to_watt(r["p_sum_dbm"].get<double>());
            p_sum_given = true;
        }
    }
    if (!p_sum_given)
        c.p_sum = static_cast<double>(c.num_ues) * c.p_max;
    if (doc.contains("frame"))
    {
        const auto& f = doc["frame"];
        reject_unknown(f, "frame", {"tau_c", "tau_p"});
        c.tau_c = f.value("tau_c", c.tau_c);
        c.tau_p = f.value("tau_p", c.tau_p);
    }
    if (doc.contains("mobility"))
    {
        const auto& m = doc["mobility"];
        reject_unknown(m, "mobility", {"normalized_doppler", "velocity_kmh"});
        if (m.contains("normalized_doppler") && m.contains("velocity_kmh"))
            throw std::invalid_argument("config: give either mobility.normalized_doppler or mobility.velocity_kmh");
        if (m.contains("normalized_doppler"))
            c.normalized_doppler = detail::number_or_list(m["normalized_doppler"]);
        if (m.contains("velocity_kmh"))
        {
            c.normalized_doppler.clear();
            for (double v : detail::number_or_list(m["velocity_kmh"]))
                c.normalized_doppler.push_back(velocity_to_normalized_doppler(v / 3.6, c.carrier_freq, c.sample_time));
        }
    }
    if (doc.contains("pilots"))
    {
        const auto& p = doc["pilots"];
        reject_unknown(p, "pilots", {"policy"});
        const auto policy = p.value("policy", std::string("round_robin"));
        if (policy == "round_robin")
            c.pilot_policy = PilotPolicy::RoundRobin;
        else if (policy == "random")
            c.pilot_policy = PilotPolicy::Random;
        else
            throw std::invalid_argument("config: unknown pilot policy '" + policy + "'");
    }
    if (doc.contains("power"))
    {
        const auto& p = doc["power"];
        reject_unknown(p, "power", {"mode"});
        c.power_mode = parse_power_mode(p.value("mode", std::string("full")));
        spec.power_modes = {c.power_mode};
    }
    c.rng_seed = doc.value("seed", c.rng_seed);

    spec.doppler_sweep = {c.normalized_doppler.front()};
    if (doc.contains("experiment"))
    {
        const auto& e = doc["experiment"];
        reject_unknown(e, "experiment", {"drops", "doppler_sweep", "systems", "power_modes", "output", "format",
                                         "samples_output", "workers"});
        spec.n_drops = e.value("drops", spec.n_drops);
        if (e.contains("doppler_sweep"))
            spec.doppler_sweep = e["doppler_sweep"].get<std::vector<double>>();
        if (e.contains("systems"))
        {
            spec.systems.clear();
            for (const auto& s : e["systems"])
                spec.systems.push_back(parse_system(s.get<std::string>()));
        }
        if (e.contains("power_modes"))
        {
            spec.power_modes.clear();
            for (const auto& s : e["power_modes"])
                spec.power_modes.push_back(parse_power_mode(s.get<std::string>()));
        }
        if (e.contains("output"))
            spec.output_path = e["output"].get<std::string>();
        if (e.contains("samples_output"))
            spec.samples_path = e["samples_output"].get<std::string>();
        if (e.contains("format"))
            spec.output_format = parse_format(e["format"].get<std::string>());
        spec.workers = e.value("workers", spec.workers);
    }
    spec.validate();
    return spec;
}

inline ExperimentSpec load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path.string());
    nlohmann::json doc;
    try
    {
        in >> doc;
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return parse_experiment(doc);
}

} // namespace cfaging
