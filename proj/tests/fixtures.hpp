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

#include <random>
#include <vector>

#include "cfaging/aging.hpp"
#include "cfaging/scenario.hpp"

namespace cfaging::testing {

inline NetworkScenario manual_scenario(const RealMatrix& beta, const RealVector& powers)
{
    NetworkScenario sc;
    sc.beta = beta;
    sc.powers = powers;
    sc.ap_positions.resize(static_cast<std::size_t>(beta.cols()));
    sc.ue_positions.resize(static_cast<std::size_t>(beta.rows()));
    return sc;
}

/// Everything needed to evaluate the closed forms on one instance.
struct Instance
{
    NetworkScenario scenario;
    PilotAssignment pilots;
    AgingProfile profile;
    EstimationStats stats;
};

inline Instance make_instance(const NetworkScenario& sc, std::size_t tau_p, std::size_t tau_c,
                              const std::vector<double>& dopplers, double noise_power)
{
    Instance in;
    in.scenario = sc;
    in.pilots = assign_pilots(sc.num_ues(), tau_p, PilotPolicy::RoundRobin, 0);
    in.profile = make_profile(dopplers.size() == 1 ? std::vector<double>(sc.num_ues(), dopplers[0]) : dopplers, tau_c);
    in.stats = estimation_variance(sc, in.pilots, in.profile, noise_power);
    return in;
}

/// Random desk-sized instance with gains spread over a few decades.
inline Instance random_instance(std::mt19937_64& rng, std::size_t L, std::size_t K, std::size_t tau_p,
                                std::size_t tau_c, double fdts)
{
    std::uniform_real_distribution<double> expo(-3.0, 0.0);
    std::uniform_real_distribution<double> pw(0.2, 1.0);
    RealMatrix beta(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(L));
    for (Eigen::Index k = 0; k < beta.rows(); ++k)
        for (Eigen::Index l = 0; l < beta.cols(); ++l)
            beta(k, l) = std::pow(10.0, expo(rng));
    RealVector p(static_cast<Eigen::Index>(K));
    for (Eigen::Index k = 0; k < p.size(); ++k)
        p[k] = pw(rng);
    return make_instance(manual_scenario(beta, p), tau_p, tau_c, {fdts}, 0.01);
}

} // namespace cfaging::testing
