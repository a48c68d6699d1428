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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfaging/aging.hpp"
#include "cfaging/config.hpp"
#include "cfaging/mc_oracle.hpp"
#include "cfaging/parallel.hpp"
#include "cfaging/scenario.hpp"
#include "cfaging/se_engine.hpp"

namespace cfaging {

/// Linear-interpolated empirical quantile of ascending samples.
inline double percentile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty())
        throw std::domain_error("percentile: no samples");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::domain_error("percentile: q must lie in [0, 1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size())
        return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Pooled per-UE SE samples of one (system, power mode, Doppler) combination.
struct SeSeries
{
    System system = System::CellFreeLsfd;
    PowerMode power_mode = PowerMode::FullPower;
    double fdts = 0.0;
    std::vector<double> samples; // ascending

    double likely95() const { return percentile(samples, 0.05); }
    double median() const { return percentile(samples, 0.5); }
    double mean() const
    {
        double s = 0.0;
        for (double v : samples)
            s += v;
        return s / static_cast<double>(samples.size());
    }
};

struct CDFResult
{
    std::vector<SeSeries> series;

    const SeSeries& find(System s, PowerMode m, double fdts) const
    {
        for (const auto& x : series)
            if (x.system == s && x.power_mode == m && x.fdts == fdts)
                return x;
        throw std::out_of_range("CDFResult: no such series");
    }
};

/// Transmit powers a receiver sees in one drop.
inline RealVector drop_powers(const SimConfig& cfg, const NetworkScenario& sc, PowerMode mode, System system)
{
    if (mode == PowerMode::FullPower)
        return RealVector::Constant(sc.beta.rows(), cfg.p_max);
    if (system == System::SmallCell)
        return fpc_powers_smallcell(sc.beta, strongest_ap(sc.beta), cfg.p_sum);
    return fpc_powers_cf(sc.beta, cfg.p_sum);
}

inline std::uint64_t drop_seed(std::uint64_t base_seed, std::size_t drop) { return derive_seed(base_seed, drop); }

/// Per-UE SE of every requested (system, power mode) for one drop at one Doppler value.
/// Result order follows spec.power_modes x spec.systems.
inline std::vector<std::vector<double>> evaluate_drop(const ExperimentSpec& spec, const SimConfig& cfg,
                                                      std::size_t drop)
{
    const std::uint64_t seed = drop_seed(cfg.rng_seed, drop);
    NetworkScenario sc = generate_scenario(cfg, seed);
    const PilotAssignment pilots = assign_pilots(cfg.num_ues, cfg.tau_p, cfg.pilot_policy, seed);
    const AgingProfile profile = make_profile(cfg);

    std::vector<std::vector<double>> out;
    for (PowerMode mode : spec.power_modes)
    {
        // cell-free receivers share one set of statistics
        std::optional<EstimationStats> cf_stats;
        for (System system : spec.systems)
        {
            std::vector<double> se(cfg.num_ues);
            if (system == System::SmallCell)
            {
                sc.powers = drop_powers(cfg, sc, mode, system);
                const auto st = estimation_variance(sc, pilots, profile, cfg.noise_power);
                for (std::size_t k = 0; k < cfg.num_ues; ++k)
                    se[k] = select_best_ap(k, st, profile).se;
            }
            else
            {
                if (!cf_stats)
                {
                    sc.powers = drop_powers(cfg, sc, mode, system);
                    cf_stats = estimation_variance(sc, pilots, profile, cfg.noise_power);
                }
                const auto combining = system == System::CellFreeLsfd ? CombiningMode::LSFD : CombiningMode::MF;
                for (std::size_t k = 0; k < cfg.num_ues; ++k)
                    se[k] = se_cf(k, *cf_stats, profile, combining);
            }
            out.push_back(std::move(se));
        }
    }
    return out;
}

inline void ensure_writable(const std::filesystem::path& path)
{
    if (path.empty())
        return;
    std::ofstream probe(path, std::ios::app);
    if (!probe)
        throw std::runtime_error("output path is not writable: " + path.string());
}

/// All drops at the Doppler value(s) of spec.base; every UE sample is pooled per series.
inline CDFResult run_drops(const ExperimentSpec& spec)
{
    spec.validate();
    const SimConfig& cfg = spec.base;
    const std::size_t workers = spec.workers == 0 ? default_workers() : spec.workers;
    const auto per_drop = parallel_map(spec.n_drops, workers, [&](std::size_t d) { return evaluate_drop(spec, cfg, d); });

    CDFResult result;
    for (PowerMode mode : spec.power_modes)
        for (System system : spec.systems)
            result.series.push_back({system, mode, cfg.normalized_doppler.front(), {}});
    for (const auto& drop : per_drop)
        for (std::size_t s = 0; s < drop.size(); ++s)
            result.series[s].samples.insert(result.series[s].samples.end(), drop[s].begin(), drop[s].end());
    for (auto& s : result.series)
        std::sort(s.samples.begin(), s.samples.end());
    return result;
}

inline ExperimentSpec at_doppler(ExperimentSpec spec, double fdts)
{
    spec.base.normalized_doppler = {fdts};
    return spec;
}

/// run_drops for every sweep value; drop seeds are shared so only the aging differs.
inline CDFResult sweep_doppler(const ExperimentSpec& spec)
{
    spec.validate();
    CDFResult all;
    for (double f : spec.doppler_sweep)
    {
        auto part = run_drops(at_doppler(spec, f));
        for (auto& s : part.series)
            all.series.push_back(std::move(s));
    }
    return all;
}

// Shortest round-trip decimal; independent of the global locale.
inline std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct SummaryRow
{
    std::string system;
    std::string power_mode;
    double fdts;
    std::string metric;
    double value;
};

inline std::vector<SummaryRow> summarize(const CDFResult& r)
{
    std::vector<SummaryRow> rows;
    for (const auto& s : r.series)
    {
        const auto sys = to_string(s.system);
        const auto pm = to_string(s.power_mode);
        rows.push_back({sys, pm, s.fdts, "p05", s.likely95()});
        rows.push_back({sys, pm, s.fdts, "p50", s.median()});
        rows.push_back({sys, pm, s.fdts, "mean", s.mean()});
        rows.push_back({sys, pm, s.fdts, "count", static_cast<double>(s.samples.size())});
    }
    return rows;
}

inline void write_summary(const CDFResult& r, std::ostream& out, OutputFormat format)
{
    const auto rows = summarize(r);
    if (format == OutputFormat::CSV)
    {
        out << "system,power_mode,fdts,metric,value\n";
        for (const auto& row : rows)
            out << row.system << ',' << row.power_mode << ',' << format_number(row.fdts) << ',' << row.metric << ','
                << format_number(row.value) << '\n';
        return;
    }
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& row : rows)
        doc.push_back({{"system", row.system},
                       {"power_mode", row.power_mode},
                       {"fdts", row.fdts},
                       {"metric", row.metric},
                       {"value", row.value}});
    out << doc.dump(2) << '\n';
}

/// Raw samples with their empirical CDF value, one row per UE sample.
inline void write_samples(const CDFResult& r, std::ostream& out)
{
    out << "system,power_mode,fdts,se,cdf\n";
    for (const auto& s : r.series)
    {
        const double n = static_cast<double>(s.samples.size());
        for (std::size_t i = 0; i < s.samples.size(); ++i)
            out << to_string(s.system) << ',' << to_string(s.power_mode) << ',' << format_number(s.fdts) << ','
                << format_number(s.samples[i]) << ',' << format_number(static_cast<double>(i + 1) / n) << '\n';
    }
}

inline void write_outputs(const ExperimentSpec& spec, const CDFResult& r)
{
    if (!spec.output_path.empty())
    {
        std::ofstream out(spec.output_path, std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + spec.output_path.string());
        write_summary(r, out, spec.output_format);
    }
    if (!spec.samples_path.empty())
    {
        std::ofstream out(spec.samples_path, std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + spec.samples_path.string());
        write_samples(r, out);
    }
}

// ----- oracle validation ----------------------------------------------------------

/// Small instance on which every closed form is compared against Monte Carlo.
struct DeskInstance
{
    std::size_t num_aps = 10;
    std::size_t num_ues = 4;
    std::size_t tau_p = 2;
    std::size_t tau_c = 20;
    double area_side = 200.0;
    std::vector<double> dopplers{0.0, 0.005};
    std::size_t n_blocks = 100000;
    std::uint64_t seed = 7;
    double tolerance = 0.02;
    bool include_contamination_free = true;
    ChannelModel model = ChannelModel::Anchored;
    // scales gamma on the closed-form side only; anything but 1 must make validation fail
    double gamma_corruption = 1.0;
    std::size_t workers = 0;
};

struct ValidationEntry
{
    std::string label;    // case description
    std::string quantity; // ds, bu, ca, ui, ns, se-cf-lsfd, se-cf-mf, se-small-cell
    std::size_t ue = 0;
    std::size_t instant = 0;
    double closed_form = 0.0;
    double monte_carlo = 0.0;
    double std_error = 0.0;
    double rel_error = 0.0;
    bool pass = true;
};

struct ValidationReport
{
    std::vector<ValidationEntry> entries;
    double tolerance = 0.02;

    bool passed() const
    {
        return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
    }
    std::size_t failures() const
    {
        return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.pass; }));
    }
    /// Largest relative error per quantity (optionally restricted to one case label).
    std::map<std::string, double> worst(const std::string& label_prefix = "") const
    {
        std::map<std::string, double> m;
        for (const auto& e : entries)
            if (e.label.rfind(label_prefix, 0) == 0)
                m[e.quantity] = std::max(m[e.quantity], e.rel_error);
        return m;
    }
};

inline SimConfig desk_config(const DeskInstance& desk, double fdts, std::size_t tau_p)
{
    SimConfig c;
    c.num_aps = desk.num_aps;
    c.num_ues = desk.num_ues;
    c.tau_p = tau_p;
    c.tau_c = desk.tau_c;
    c.area_side = desk.area_side;
    c.normalized_doppler = {fdts};
    c.p_sum = static_cast<double>(c.num_ues) * c.p_max;
    c.rng_seed = desk.seed;
    return c;
}

namespace detail {

inline void add_entry(ValidationReport& rep, const std::string& label, const std::string& q, std::size_t k,
                      std::size_t n, double closed, double mc, double se)
{
    ValidationEntry e{label, q, k, n, closed, mc, se, 0.0, true};
    if (closed == 0.0)
    {
        e.rel_error = std::abs(mc);
        e.pass = mc == 0.0;
    }
    else
    {
        e.rel_error = std::abs(mc - closed) / std::abs(closed);
        e.pass = e.rel_error <= rep.tolerance;
    }
    rep.entries.push_back(e);
}

} // namespace detail

/// Compares every term expectation, the cell-free SE for both receivers and the single-AP SE
/// against Monte Carlo on the desk instance.
inline ValidationReport validate(const DeskInstance& desk)
{
    ValidationReport rep;
    rep.tolerance = desk.tolerance;
    const std::size_t workers = desk.workers == 0 ? default_workers() : desk.workers;

    std::vector<std::pair<std::string, std::size_t>> cases{{"contaminated", desk.tau_p}};
    if (desk.include_contamination_free)
        cases.emplace_back("contamination-free", desk.num_ues);

    for (const auto& [case_name, tau_p] : cases)
        for (double fdts : desk.dopplers)
        {
            const SimConfig cfg = desk_config(desk, fdts, tau_p);
            const NetworkScenario sc = generate_scenario(cfg, desk.seed);
            const PilotAssignment pilots = assign_pilots(cfg.num_ues, tau_p, PilotPolicy::RoundRobin, desk.seed);
            const AgingProfile profile = make_profile(cfg);
            const EstimationStats truth = estimation_variance(sc, pilots, profile, cfg.noise_power);
            EstimationStats claimed = truth;
            claimed.gamma *= desk.gamma_corruption;

            const std::string label = case_name + " fdts=" + format_number(fdts);
            OracleOptions opt;
            opt.model = desk.model;
            opt.workers = workers;
            const std::size_t instants = cfg.tau_c + 1 - truth.lambda;

            for (CombiningMode mode : {CombiningMode::LSFD, CombiningMode::MF})
            {
                const std::string tag = mode == CombiningMode::LSFD ? "lsfd" : "mf";
                const WeightTable w = weight_table(mode, claimed, profile);
                const TermEstimates mc = estimate_sinr_terms(truth, profile, w, desk.n_blocks,
                                                             derive_seed(desk.seed, 17), opt);
                const TermEstimates cf = analytic_terms(claimed, profile, w);
                double se_mc = 0.0;
                double se_closed = 0.0;
                for (std::size_t k = 0; k < cfg.num_ues; ++k)
                {
                    se_mc = 0.0;
                    se_closed = 0.0;
                    for (std::size_t idx = 0; idx < instants; ++idx)
                    {
                        const std::size_t n = truth.lambda + idx;
                        const std::string lt = label + " " + tag;
                        detail::add_entry(rep, lt, "ds", k, n, cf.ds[k][idx], mc.ds[k][idx], mc.ds_se[k][idx]);
                        detail::add_entry(rep, lt, "bu", k, n, cf.bu[k][idx], mc.bu[k][idx], mc.bu_se[k][idx]);
                        detail::add_entry(rep, lt, "ca", k, n, cf.ca[k][idx], mc.ca[k][idx], mc.ca_se[k][idx]);
                        detail::add_entry(rep, lt, "ns", k, n, cf.ns[k][idx], mc.ns[k][idx], mc.ns_se[k][idx]);
                        for (std::size_t i = 0; i < cfg.num_ues; ++i)
                            if (i != k)
                                detail::add_entry(rep, lt, "ui", k, n, cf.ui[k][i][idx], mc.ui[k][i][idx],
                                                  mc.ui_se[k][i][idx]);
                        se_mc += std::log2(1.0 + mc.sinr(k, idx));
                        se_closed += std::log2(1.0 + sinr_cf(k, n, w[k][idx], claimed, profile));
                    }
                    const double tc = static_cast<double>(cfg.tau_c);
                    detail::add_entry(rep, label, "se-cf-" + tag, k, 0, se_closed / tc, se_mc / tc, 0.0);
                }
            }

            for (std::size_t k = 0; k < cfg.num_ues; ++k)
            {
                const std::size_t l = select_best_ap(k, claimed, profile).ap;
                const double closed = se_smallcell(k, l, claimed, profile);
                const auto mc = estimate_se_smallcell_mc(k, l, truth, profile, desk.n_blocks,
                                                         derive_seed(desk.seed, 31 + k), workers);
                detail::add_entry(rep, label, "se-small-cell", k, l, closed, mc.value, mc.std_error);
            }
        }
    return rep;
}

inline void write_validation(const ValidationReport& rep, std::ostream& out)
{
    out << "case,quantity,ue,instant,closed_form,monte_carlo,std_error,rel_error,pass\n";
    for (const auto& e : rep.entries)
        out << e.label << ',' << e.quantity << ',' << e.ue << ',' << e.instant << ',' << format_number(e.closed_form)
            << ',' << format_number(e.monte_carlo) << ',' << format_number(e.std_error) << ','
            << format_number(e.rel_error) << ',' << (e.pass ? "yes" : "NO") << '\n';
}

} // namespace cfaging
