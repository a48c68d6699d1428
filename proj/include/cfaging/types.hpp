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

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cfaging {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;

enum class PowerMode
{
    FullPower,
    FPC
};

enum class PilotPolicy
{
    RoundRobin,
    Random
};

enum class System
{
    CellFreeLsfd,
    CellFreeMf,
    SmallCell
};

enum class CombiningMode
{
    LSFD,
    MF
};

/// Physical and protocol parameters of one simulated network, in SI units.
struct SimConfig
{
    std::size_t num_aps = 100;
    std::size_t num_ues = 20;
    double area_side = 500.0;         // m
    double carrier_freq = 2e9;        // Hz
    double sample_time = 10e-6;       // s
    std::size_t tau_c = 200;
    std::size_t tau_p = 10;
    double noise_power = 2.5118864315095823e-13; // W, -96 dBm
    double p_max = 0.1;               // W, 20 dBm
    double p_sum = 2.0;               // W, K * p_max
    double bandwidth = 20e6;          // Hz, reporting only
    std::vector<double> normalized_doppler{0.0}; // one shared value or one per UE
    PowerMode power_mode = PowerMode::FullPower;
    PilotPolicy pilot_policy = PilotPolicy::RoundRobin;
    bool shadowing = true;
    double shadow_std_db = 8.0;
    double ap_height = 15.0;          // m
    double ue_height = 1.65;          // m
    std::uint64_t rng_seed = 1;

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const
    {
        if (num_aps == 0 || num_ues == 0)
            throw std::invalid_argument("SimConfig: need at least one AP and one UE");
        if (!(tau_p > 0 && tau_p < tau_c))
            throw std::invalid_argument("SimConfig: require 0 < tau_p < tau_c");
        if (!(area_side > 0.0))
            throw std::invalid_argument("SimConfig: area_side must be positive");
        if (!(noise_power > 0.0))
            throw std::invalid_argument("SimConfig: noise power must be positive");
        if (p_max < 0.0 || p_sum < 0.0)
            throw std::invalid_argument("SimConfig: powers must be non-negative");
        if (normalized_doppler.empty() || (normalized_doppler.size() != 1 && normalized_doppler.size() != num_ues))
            throw std::invalid_argument("SimConfig: normalized_doppler needs 1 or K entries");
        for (double f : normalized_doppler)
            if (!(f >= 0.0 && f < 0.5))
                throw std::invalid_argument("SimConfig: normalized Doppler must lie in [0, 0.5)");
    }

    double doppler_of(std::size_t k) const
    {
        return normalized_doppler.size() == 1 ? normalized_doppler.front() : normalized_doppler.at(k);
    }
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

} // namespace cfaging
