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


// Command-line front end: run, sweep, validate, convert-velocity.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cfaging/harness.hpp"

namespace {

using namespace cfaging;

struct CommonOptions
{
    std::string config;
    std::size_t drops = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    std::string samples;
    std::string format;
    std::string systems;
    std::string power;
    std::size_t workers = 0;
};

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "JSON experiment file");
    cmd->add_option("--drops", o.drops, "number of random drops");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&o](std::uint64_t s) { o.seed = s; o.seed_given = true; }, "base RNG seed");
    cmd->add_option("--out", o.out, "summary output file (stdout when omitted)");
    cmd->add_option("--samples", o.samples, "raw per-UE sample file for CDF plots");
    cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--systems", o.systems, "comma list of cf-lsfd,cf-mf,small-cell");
    cmd->add_option("--power", o.power, "full|fpc (comma list allowed)");
    cmd->add_option("--workers", o.workers, "worker threads (0: all cores)");
}

ExperimentSpec build_spec(const CommonOptions& o)
{
    ExperimentSpec spec = o.config.empty() ? parse_experiment(nlohmann::json::object()) : load_experiment(o.config);
    if (o.drops > 0)
        spec.n_drops = o.drops;
    if (o.seed_given)
        spec.base.rng_seed = o.seed;
    if (!o.out.empty())
        spec.output_path = o.out;
    if (!o.samples.empty())
        spec.samples_path = o.samples;
    if (!o.format.empty())
        spec.output_format = parse_format(o.format);
    if (!o.systems.empty())
    {
        spec.systems.clear();
        for (const auto& s : split_list(o.systems))
            spec.systems.push_back(parse_system(s));
    }
    if (!o.power.empty())
    {
        spec.power_modes.clear();
        for (const auto& s : split_list(o.power))
            spec.power_modes.push_back(parse_power_mode(s));
    }
    if (o.workers > 0)
        spec.workers = o.workers;
    spec.validate();
    return spec;
}

void emit(const ExperimentSpec& spec, const CDFResult& r)
{
    if (spec.output_path.empty())
        write_summary(r, std::cout, spec.output_format);
    write_outputs(spec, r);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Uplink SE of cell-free massive MIMO and small cells under channel aging"};
    app.require_subcommand(1);

    CommonOptions run_opt;
    auto* run = app.add_subcommand("run", "single experiment at one normalized Doppler value");
    add_common(run, run_opt);
    double run_fdts = -1.0;
    run->add_option("--fdts", run_fdts, "normalized Doppler f_D T_s (overrides the config)");

    CommonOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "95%-likely SE over a normalized Doppler sweep");
    add_common(sweep, sweep_opt);
    std::vector<double> sweep_values;
    sweep->add_option("--fdts", sweep_values, "sweep values (overrides the config)");

    auto* val = app.add_subcommand("validate", "closed forms against the Monte Carlo oracle");
    DeskInstance desk;
    std::string val_out;
    std::string val_model = "anchored";
    val->add_option("--blocks", desk.n_blocks, "Monte Carlo blocks per case");
    val->add_option("--seed", desk.seed, "seed of the desk drop and oracle");
    val->add_option("--aps", desk.num_aps);
    val->add_option("--ues", desk.num_ues);
    val->add_option("--tau-p", desk.tau_p);
    val->add_option("--tau-c", desk.tau_c);
    val->add_option("--area", desk.area_side, "square side in m");
    val->add_option("--fdts", desk.dopplers, "normalized Doppler values");
    val->add_option("--tolerance", desk.tolerance, "relative tolerance");
    val->add_option("--model", val_model, "anchored|stationary channel realization")
        ->check(CLI::IsMember({"anchored", "stationary"}));
    val->add_option("--workers", desk.workers);
    val->add_option("--out", val_out, "full per-entry report (CSV)");

    auto* conv = app.add_subcommand("convert-velocity", "UE speed to normalized Doppler f_D T_s");
    double velocity = 0.0;
    double carrier_ghz = 2.0;
    double sample_time_us = 10.0;
    bool kmh = false;
    conv->add_option("velocity", velocity, "UE speed (m/s, or km/h with --kmh)")->required();
    conv->add_flag("--kmh", kmh, "velocity given in km/h");
    conv->add_option("--carrier-ghz", carrier_ghz);
    conv->add_option("--sample-time-us", sample_time_us);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            auto spec = build_spec(run_opt);
            if (run_fdts >= 0.0)
                spec.base.normalized_doppler = {run_fdts};
            spec.validate();
            ensure_writable(spec.output_path);
            ensure_writable(spec.samples_path);
            emit(spec, run_drops(spec));
        }
        else if (*sweep)
        {
            auto spec = build_spec(sweep_opt);
            if (!sweep_values.empty())
                spec.doppler_sweep = sweep_values;
            spec.validate();
            ensure_writable(spec.output_path);
            ensure_writable(spec.samples_path);
            emit(spec, sweep_doppler(spec));
        }
        else if (*val)
        {
            desk.model = val_model == "stationary" ? ChannelModel::Stationary : ChannelModel::Anchored;
            const auto rep = validate(desk);
            if (!val_out.empty())
            {
                std::ofstream out(val_out);
                if (!out)
                    throw std::runtime_error("cannot write " + val_out);
                write_validation(rep, out);
            }
            for (const auto& [q, err] : rep.worst())
                std::cout << q << " worst relative error " << format_number(err) << '\n';
            for (const auto& e : rep.entries)
                if (!e.pass)
                    std::cout << "FAIL " << e.label << ' ' << e.quantity << " ue=" << e.ue << " n=" << e.instant
                              << " closed=" << format_number(e.closed_form) << " mc=" << format_number(e.monte_carlo)
                              << '\n';
            std::cout << (rep.passed() ? "validation passed" : "validation FAILED") << " (" << rep.entries.size()
                      << " comparisons, " << rep.failures() << " failures)\n";
            return rep.passed() ? EXIT_SUCCESS : EXIT_FAILURE;
        }
        else if (*conv)
        {
            const double v = kmh ? velocity / 3.6 : velocity;
            std::cout << format_number(velocity_to_normalized_doppler(v, carrier_ghz * 1e9, sample_time_us * 1e-6))
                      << '\n';
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return EXIT_SUCCESS;
}
