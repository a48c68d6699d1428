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
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "cfaging/rng.hpp"
#include "cfaging/types.hpp"

namespace cfaging {

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// One random drop: geometry, large-scale fading (K x L, linear) and transmit powers.
struct NetworkScenario
{
    std::vector<Point> ap_positions;
    std::vector<Point> ue_positions;
    RealMatrix beta;
    RealVector powers;

    std::size_t num_ues() const { return static_cast<std::size_t>(beta.rows()); }
    std::size_t num_aps() const { return static_cast<std::size_t>(beta.cols()); }
};

/// Pilot instants t_k in {1..tau_p} and the sets P_k = {i : t_i = t_k}.
struct PilotAssignment
{
    std::size_t tau_p = 0;
    std::vector<std::size_t> t;
    std::vector<std::vector<std::size_t>> sharing_sets;

    std::size_t num_ues() const { return t.size(); }
    bool shares(std::size_t k, std::size_t i) const { return t[k] == t[i]; }
};

// Three-slope model with a Hata-COST231 base loss.
struct PathLossModel
{
    double carrier_freq = 2e9;
    double ap_height = 15.0;
    double ue_height = 1.65;
    double d0 = 10.0;
    double d1 = 50.0;

    /// Base loss in dB for distances in km.
    double base_loss_db() const
    {
        const double f = carrier_freq / 1e6;
        const double lf = std::log10(f);
        return 46.3 + 33.9 * lf - 13.82 * std::log10(ap_height) - (1.1 * lf - 0.7) * ue_height
            + (1.56 * lf - 0.8);
    }

    /// Path gain in dB (negative), without shadowing.
    double gain_db(double d) const
    {
        if (d < 0.0 || std::isnan(d))
            throw std::domain_error("path_loss: distance must be non-negative");
        d = std::max(d, 1.0);
        const double lambda_db = base_loss_db();
        if (d > d1)
            return -lambda_db - 35.0 * std::log10(d / 1000.0);
        if (d > d0)
            return -lambda_db - 15.0 * std::log10(d1 / 1000.0) - 20.0 * std::log10(d / 1000.0);
        return -lambda_db - 15.0 * std::log10(d1 / 1000.0) - 20.0 * std::log10(d0 / 1000.0);
    }

    double gain(double d) const { return std::pow(10.0, gain_db(d) / 10.0); }
};

inline double path_loss(double distance_m, const PathLossModel& model = {}) { return model.gain(distance_m); }

inline PathLossModel path_loss_model(const SimConfig& cfg)
{
    PathLossModel m;
    m.carrier_freq = cfg.carrier_freq;
    m.ap_height = cfg.ap_height;
    m.ue_height = cfg.ue_height;
    return m;
}

inline PilotAssignment assign_pilots(std::size_t num_ues, std::size_t tau_p, PilotPolicy policy, std::uint64_t seed)
{
    if (tau_p < 1)
        throw std::invalid_argument("assign_pilots: tau_p must be at least 1");
    PilotAssignment pa;
    pa.tau_p = tau_p;
    pa.t.resize(num_ues);
    Rng rng(derive_seed(seed, 0x9170));
    std::uniform_int_distribution<std::size_t> pick(1, tau_p);
    for (std::size_t k = 0; k < num_ues; ++k)
        pa.t[k] = policy == PilotPolicy::RoundRobin ? (k % tau_p) + 1 : pick(rng);

    pa.sharing_sets.resize(num_ues);
    for (std::size_t k = 0; k < num_ues; ++k)
        for (std::size_t i = 0; i < num_ues; ++i)
            if (pa.t[i] == pa.t[k])
                pa.sharing_sets[k].push_back(i);
    return pa;
}

/// Small-cell FPC: power share proportional to the serving-AP gain.
inline RealVector fpc_powers_smallcell(const RealMatrix& beta, const std::vector<std::size_t>& serving_ap, double p_sum)
{
    const auto K = static_cast<std::size_t>(beta.rows());
    if (serving_ap.size() != K)
        throw std::invalid_argument("fpc_powers_smallcell: one serving AP per UE required");
    RealVector served(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        if (serving_ap[k] >= static_cast<std::size_t>(beta.cols()))
            throw std::invalid_argument("fpc_powers_smallcell: serving AP index out of range");
        served[k] = beta(k, serving_ap[k]);
    }
    const double total = served.sum();
    if (!(total > 0.0))
        throw std::domain_error("fpc_powers_smallcell: all serving gains are zero");
    return served / total * p_sum;
}

/// Cell-free FPC: power share proportional to the UE's total large-scale gain.
inline RealVector fpc_powers_cf(const RealMatrix& beta, double p_sum)
{
    const RealVector rows = beta.rowwise().sum();
    const double total = rows.sum();
    if (!(total > 0.0))
        throw std::domain_error("fpc_powers_cf: all gains are zero");
    return rows / total * p_sum;
}

/// Index of the strongest AP per UE; the cell used by small-cell FPC.
inline std::vector<std::size_t> strongest_ap(const RealMatrix& beta)
{
    std::vector<std::size_t> out(static_cast<std::size_t>(beta.rows()));
    for (Eigen::Index k = 0; k < beta.rows(); ++k)
    {
        Eigen::Index best = 0;
        beta.row(k).maxCoeff(&best);
        out[static_cast<std::size_t>(k)] = static_cast<std::size_t>(best);
    }
    return out;
}

/// Random drop: APs and UEs uniform over the square, shadowing on the far slope only.
inline NetworkScenario generate_scenario(const SimConfig& cfg, std::uint64_t drop_seed)
{
    cfg.validate();
    Rng rng(derive_seed(drop_seed, 0x5ce7));
    std::uniform_real_distribution<double> coord(0.0, cfg.area_side);
    std::normal_distribution<double> shadow(0.0, cfg.shadow_std_db);

    NetworkScenario sc;
    sc.ap_positions.resize(cfg.num_aps);
    sc.ue_positions.resize(cfg.num_ues);
    for (auto& p : sc.ap_positions)
        p = {coord(rng), coord(rng)};
    for (auto& p : sc.ue_positions)
        p = {coord(rng), coord(rng)};

    const PathLossModel model = path_loss_model(cfg);
    sc.beta.resize(static_cast<Eigen::Index>(cfg.num_ues), static_cast<Eigen::Index>(cfg.num_aps));
    for (std::size_t k = 0; k < cfg.num_ues; ++k)
        for (std::size_t l = 0; l < cfg.num_aps; ++l)
        {
            const double d = distance(sc.ue_positions[k], sc.ap_positions[l]);
            // always drawn so the stream does not depend on the toggle
            const double z = shadow(rng);
            double g = model.gain_db(d);
            if (cfg.shadowing && d > model.d1)
                g += z;
            sc.beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = std::pow(10.0, g / 10.0);
        }

    if (cfg.power_mode == PowerMode::FullPower)
        sc.powers = RealVector::Constant(static_cast<Eigen::Index>(cfg.num_ues), cfg.p_max);
    else
        sc.powers = fpc_powers_cf(sc.beta, cfg.p_sum);
    return sc;
}

} // namespace cfaging
