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
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cfaging/scenario.hpp"
#include "cfaging/specfun.hpp"
#include "cfaging/types.hpp"

namespace cfaging {

/// rho(n) = J0(2 pi f_D T_s n), n = 0..tau_c.
inline std::vector<double> correlation_profile(double normalized_doppler, std::size_t tau_c)
{
    if (!(normalized_doppler >= 0.0))
        throw std::domain_error("correlation_profile: normalized Doppler must be non-negative");
    std::vector<double> rho(tau_c + 1);
    for (std::size_t n = 0; n <= tau_c; ++n)
        rho[n] = specfun::bessel_j0(2.0 * std::numbers::pi * normalized_doppler * static_cast<double>(n));
    return rho;
}

/// Per-UE temporal correlation indexed by lag.
struct AgingProfile
{
    std::vector<std::vector<double>> rho;

    double at(std::size_t k, std::size_t lag) const { return rho[k][lag]; }
    double bar(std::size_t k, std::size_t lag) const
    {
        const double r = rho[k][lag];
        return std::sqrt(std::max(0.0, 1.0 - r * r));
    }
    std::size_t num_ues() const { return rho.size(); }
    std::size_t tau_c() const { return rho.empty() ? 0 : rho.front().size() - 1; }
};

inline AgingProfile make_profile(const std::vector<double>& normalized_doppler, std::size_t tau_c)
{
    AgingProfile p;
    p.rho.reserve(normalized_doppler.size());
    for (double f : normalized_doppler)
        p.rho.push_back(correlation_profile(f, tau_c));
    return p;
}

inline AgingProfile make_profile(const SimConfig& cfg)
{
    std::vector<double> f(cfg.num_ues);
    for (std::size_t k = 0; k < cfg.num_ues; ++k)
        f[k] = cfg.doppler_of(k);
    return make_profile(f, cfg.tau_c);
}

/// Second-order statistics of the MMSE estimates anchored at lambda = tau_p + 1.
///
/// gamma(k,l) is the estimate variance; the vectors and diagonal matrices of the
/// closed forms (b_k, Gamma_ki, c_ki, Lambda_k) are all read off gamma and beta
/// through the accessors below, so nothing L x L is ever stored.
struct EstimationStats
{
    RealMatrix gamma;
    RealMatrix beta;
    RealVector powers;
    RealMatrix pilot_denominator; // sum_{i in P_k} p_i beta_il + sigma^2
    RealVector received_power;    // sum_i p_i beta_il, per AP
    PilotAssignment pilots;
    double noise_power = 0.0;
    std::size_t lambda = 0;

    std::size_t num_ues() const { return static_cast<std::size_t>(gamma.rows()); }
    std::size_t num_aps() const { return static_cast<std::size_t>(gamma.cols()); }

    RealVector b(std::size_t k) const { return gamma.row(static_cast<Eigen::Index>(k)).transpose(); }
    RealVector Lambda_diag(std::size_t k) const { return b(k); }
    RealVector Gamma_diag(std::size_t k, std::size_t i) const
    {
        return gamma.row(static_cast<Eigen::Index>(k)).cwiseProduct(beta.row(static_cast<Eigen::Index>(i))).transpose();
    }
    RealVector c(std::size_t k, std::size_t i) const
    {
        return gamma.row(static_cast<Eigen::Index>(k))
            .cwiseProduct(gamma.row(static_cast<Eigen::Index>(i)))
            .cwiseSqrt()
            .transpose();
    }
    /// Lag between UE k's pilot instant and lambda.
    std::size_t pilot_lag(std::size_t k) const { return lambda - pilots.t[k]; }
};

inline EstimationStats estimation_variance(const NetworkScenario& sc, const PilotAssignment& pilots,
                                           const AgingProfile& profile, double noise_power)
{
    const std::size_t K = sc.num_ues();
    const std::size_t L = sc.num_aps();
    if (pilots.num_ues() != K || profile.num_ues() != K || static_cast<std::size_t>(sc.powers.size()) != K)
        throw std::invalid_argument("estimation_variance: inconsistent dimensions");

    EstimationStats st;
    st.beta = sc.beta;
    st.powers = sc.powers;
    st.pilots = pilots;
    st.noise_power = noise_power;
    st.lambda = pilots.tau_p + 1;
    if (profile.tau_c() < st.lambda)
        throw std::invalid_argument("estimation_variance: profile shorter than the pilot phase");
    st.received_power = sc.beta.transpose() * sc.powers;
    st.gamma.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(L));
    st.pilot_denominator.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(L));

    for (std::size_t k = 0; k < K; ++k)
    {
        const double r = profile.at(k, st.pilot_lag(k));
        for (std::size_t l = 0; l < L; ++l)
        {
            double den = noise_power;
            for (std::size_t i : pilots.sharing_sets[k])
                den += sc.powers[i] * sc.beta(i, l);
            const double bkl = sc.beta(k, l);
            st.pilot_denominator(k, l) = den;
            st.gamma(k, l) = r * r * sc.powers[k] * bkl * bkl / den;
        }
    }
    return st;
}

/// MMSE estimate of h_kl[lambda] from the pilot observation z_l[t_k].
inline Complex mmse_estimate(Complex pilot_observation, std::size_t k, std::size_t l, const EstimationStats& st,
                             const AgingProfile& profile)
{
    const double scale = profile.at(k, st.pilot_lag(k)) * std::sqrt(st.powers[k]) * st.beta(k, l)
        / st.pilot_denominator(k, l);
    return scale * pilot_observation;
}

} // namespace cfaging
