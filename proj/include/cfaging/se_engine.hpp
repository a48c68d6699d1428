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
#include <numbers>
#include <utility>
#include <vector>

#include "cfaging/aging.hpp"
#include "cfaging/specfun.hpp"
#include "cfaging/types.hpp"

namespace cfaging {

/// CPU combining weights a_k[n] for one UE and data instant.
struct WeightVector
{
    ComplexVector a;
    std::size_t ue = 0;
    std::size_t instant = 0;
    bool degenerate = false; // LSFD system was singular; MF weights returned instead
};

inline WeightVector mf_weights(std::size_t k, std::size_t n, std::size_t num_aps)
{
    WeightVector w;
    w.a = ComplexVector::Constant(static_cast<Eigen::Index>(num_aps), Complex(1.0 / static_cast<double>(num_aps), 0.0));
    w.ue = k;
    w.instant = n;
    return w;
}

namespace detail {

inline std::size_t data_lag(const EstimationStats& st, std::size_t n)
{
    if (n < st.lambda)
        throw std::invalid_argument("data instant precedes lambda");
    return n - st.lambda;
}

} // namespace detail

/// Effective SINR of UE k at data instant n for arbitrary weights (use-and-then-forget bound).
inline double sinr_cf(std::size_t k, std::size_t n, const ComplexVector& a, const EstimationStats& st,
                      const AgingProfile& profile)
{
    const std::size_t lag = detail::data_lag(st, n);
    const auto L = static_cast<Eigen::Index>(st.num_aps());
    const auto kk = static_cast<Eigen::Index>(k);
    const double rk = profile.at(k, lag);

    Complex ab{0.0, 0.0};
    double gamma_quad = 0.0;  // sum |a_l|^2 gamma_kl S_l
    double lambda_quad = 0.0; // sum |a_l|^2 gamma_kl
    for (Eigen::Index l = 0; l < L; ++l)
    {
        const double g = st.gamma(kk, l);
        const double a2 = std::norm(a[l]);
        ab += std::conj(a[l]) * g;
        gamma_quad += a2 * g * st.received_power[l];
        lambda_quad += a2 * g;
    }
    double contamination = 0.0;
    for (std::size_t i : st.pilots.sharing_sets[k])
    {
        if (i == k)
            continue;
        const auto ii = static_cast<Eigen::Index>(i);
        Complex ac{0.0, 0.0};
        for (Eigen::Index l = 0; l < L; ++l)
            ac += std::conj(a[l]) * std::sqrt(st.gamma(kk, l) * st.gamma(ii, l));
        const double ri = profile.at(i, lag);
        contamination += ri * ri * st.powers[ii] * std::norm(ac);
    }
    const double num = rk * rk * st.powers[kk] * std::norm(ab);
    const double den = gamma_quad + contamination + st.noise_power * lambda_quad;
    if (!(den > 0.0) || num == 0.0)
        return 0.0;
    return num / den;
}

/// SINR-maximizing weights: (diag + low-rank)^{-1} b_k, solved with the Woodbury identity
/// on the APs where gamma_kl > 0.
inline WeightVector lsfd_weights(std::size_t k, std::size_t n, const EstimationStats& st, const AgingProfile& profile)
{
    const std::size_t lag = detail::data_lag(st, n);
    const std::size_t L = st.num_aps();
    const auto kk = static_cast<Eigen::Index>(k);

    std::vector<Eigen::Index> support;
    for (std::size_t l = 0; l < L; ++l)
        if (st.gamma(kk, static_cast<Eigen::Index>(l)) > 0.0)
            support.push_back(static_cast<Eigen::Index>(l));
    if (support.empty())
    {
        WeightVector w = mf_weights(k, n, L);
        w.degenerate = true;
        return w;
    }

    std::vector<std::size_t> sharers;
    for (std::size_t i : st.pilots.sharing_sets[k])
        if (i != k)
            sharers.push_back(i);

    const auto S = static_cast<Eigen::Index>(support.size());
    const auto R = static_cast<Eigen::Index>(sharers.size());
    RealVector d_inv_b(S);   // D^{-1} b
    RealVector d_inv(S);
    RealMatrix U(S, R);
    RealVector omega(R);
    for (Eigen::Index s = 0; s < S; ++s)
    {
        const Eigen::Index l = support[static_cast<std::size_t>(s)];
        const double g = st.gamma(kk, l);
        const double d = g * (st.received_power[l] + st.noise_power);
        d_inv[s] = 1.0 / d;
        d_inv_b[s] = g / d;
        for (Eigen::Index j = 0; j < R; ++j)
            U(s, j) = std::sqrt(g * st.gamma(static_cast<Eigen::Index>(sharers[static_cast<std::size_t>(j)]), l));
    }
    for (Eigen::Index j = 0; j < R; ++j)
    {
        const auto i = sharers[static_cast<std::size_t>(j)];
        const double ri = profile.at(i, lag);
        omega[j] = ri * ri * st.powers[static_cast<Eigen::Index>(i)];
    }

    RealVector x = d_inv_b;
    if (R > 0)
    {
        // M^{-1} = D^{-1} - D^{-1} U (I + W U^T D^{-1} U)^{-1} W U^T D^{-1}
        const RealMatrix dinv_u = d_inv.asDiagonal() * U;
        RealMatrix core = omega.asDiagonal() * (U.transpose() * dinv_u);
        core.diagonal().array() += 1.0;
        const RealVector rhs = omega.asDiagonal() * (U.transpose() * d_inv_b);
        x -= dinv_u * core.partialPivLu().solve(rhs);
    }

    WeightVector w;
    w.a = ComplexVector::Zero(static_cast<Eigen::Index>(L));
    for (Eigen::Index s = 0; s < S; ++s)
        w.a[support[static_cast<std::size_t>(s)]] = x[s];
    w.ue = k;
    w.instant = n;
    return w;
}

inline WeightVector combining_weights(CombiningMode mode, std::size_t k, std::size_t n, const EstimationStats& st,
                                      const AgingProfile& profile)
{
    return mode == CombiningMode::LSFD ? lsfd_weights(k, n, st, profile) : mf_weights(k, n, st.num_aps());
}

/// Per-instant SINR for n = lambda..tau_c.
inline std::vector<double> sinr_cf_instants(std::size_t k, const EstimationStats& st, const AgingProfile& profile,
                                            CombiningMode mode)
{
    const std::size_t tau_c = profile.tau_c();
    std::vector<double> out;
    out.reserve(tau_c + 1 - st.lambda);
    for (std::size_t n = st.lambda; n <= tau_c; ++n)
        out.push_back(sinr_cf(k, n, combining_weights(mode, k, n, st, profile).a, st, profile));
    return out;
}

/// Cell-free SE in bit/s/Hz; the 1/tau_c prefactor over tau_c - tau_p instants carries the pilot overhead.
inline double se_cf(std::size_t k, const EstimationStats& st, const AgingProfile& profile, CombiningMode mode)
{
    double sum = 0.0;
    for (double s : sinr_cf_instants(k, st, profile, mode))
        sum += std::log2(1.0 + s);
    return sum / static_cast<double>(profile.tau_c());
}

/// Effective SNR w_kl[n] and contamination ratio A_kl[n] of the single-AP bound.
struct SmallCellInstant
{
    double w = 0.0;
    double A = 0.0;
};

inline SmallCellInstant smallcell_instant(std::size_t k, std::size_t l, std::size_t n, const EstimationStats& st,
                                          const AgingProfile& profile)
{
    const std::size_t lag = detail::data_lag(st, n);
    const auto kk = static_cast<Eigen::Index>(k);
    const auto ll = static_cast<Eigen::Index>(l);
    const double rk = profile.at(k, lag);
    const double gkl = st.gamma(kk, ll);

    SmallCellInstant out;
    const double own = rk * profile.at(k, st.pilot_lag(k)) * st.powers[kk] * st.beta(kk, ll);
    if (gkl <= 0.0 || own == 0.0)
        return out;

    double coherent = 0.0;
    double A = 0.0;
    for (std::size_t i : st.pilots.sharing_sets[k])
    {
        const auto ii = static_cast<Eigen::Index>(i);
        const double ri = profile.at(i, lag);
        coherent += ri * ri * st.powers[ii] * st.gamma(ii, ll);
        if (i != k)
        {
            const double ratio = ri * profile.at(i, st.pilot_lag(i)) * st.powers[ii] * st.beta(ii, ll) / own;
            A += ratio * ratio;
        }
    }
    const double den = st.received_power[ll] - coherent + st.noise_power;
    out.w = rk * rk * st.powers[kk] * gkl / den;
    out.A = A;
    return out;
}

/// E{log2(1 + w(1+A)X)} - E{log2(1 + wAX)} for X ~ Exp(1), via e^x E1(x).
inline double smallcell_term(double w, double A)
{
    if (!(w > 0.0))
        return 0.0;
    const double first = specfun::exp_e1_scaled(1.0 / (w * (1.0 + A)));
    const double second = A < 1e-300 ? 0.0 : specfun::exp_e1_scaled(1.0 / (w * A));
    return std::max(0.0, (first - second) / std::numbers::ln2);
}

/// Closed-form SE of UE k when served only by AP l.
inline double se_smallcell(std::size_t k, std::size_t l, const EstimationStats& st, const AgingProfile& profile)
{
    const std::size_t tau_c = profile.tau_c();
    double sum = 0.0;
    for (std::size_t n = st.lambda; n <= tau_c; ++n)
    {
        const auto inst = smallcell_instant(k, l, n, st, profile);
        sum += smallcell_term(inst.w, inst.A);
    }
    return sum / static_cast<double>(tau_c);
}

/// Jensen bound: the SE with AP l never exceeds (1/tau_c) sum_n log2(1 + w_kl[n]).
inline double se_smallcell_upper_bound(std::size_t k, std::size_t l, const EstimationStats& st,
                                       const AgingProfile& profile)
{
    const std::size_t tau_c = profile.tau_c();
    double sum = 0.0;
    for (std::size_t n = st.lambda; n <= tau_c; ++n)
        sum += std::log2(1.0 + smallcell_instant(k, l, n, st, profile).w);
    return sum / static_cast<double>(tau_c);
}

struct ApSelection
{
    std::size_t ap = 0;
    double se = 0.0;
};

/// argmax_l se_smallcell(k, l); ties go to the lowest AP index.
///
/// APs are visited in decreasing order of the Jensen bound and the scan stops once
/// the bound falls below the best SE found, so the result equals the exhaustive max.
inline ApSelection select_best_ap(std::size_t k, const EstimationStats& st, const AgingProfile& profile)
{
    const std::size_t L = st.num_aps();
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(L);
    for (std::size_t l = 0; l < L; ++l)
        order.emplace_back(se_smallcell_upper_bound(k, l, st, profile), l);
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });

    ApSelection best{order.front().second, -1.0};
    for (const auto& [bound, l] : order)
    {
        if (bound * (1.0 + 1e-9) < best.se)
            break;
        const double se = se_smallcell(k, l, st, profile);
        if (se > best.se || (se == best.se && l < best.ap))
            best = {l, se};
    }
    return best;
}

/// Exhaustive variant of select_best_ap, kept for cross-checking the pruned scan.
inline ApSelection select_best_ap_exhaustive(std::size_t k, const EstimationStats& st, const AgingProfile& profile)
{
    ApSelection best{0, -1.0};
    for (std::size_t l = 0; l < st.num_aps(); ++l)
    {
        const double se = se_smallcell(k, l, st, profile);
        if (se > best.se)
            best = {l, se};
    }
    return best;
}

/// Per-UE SE for every receiver of one drop.
struct SEReport
{
    std::vector<double> se_lsfd;
    std::vector<double> se_mf;
    std::vector<double> se_smallcell;
    std::vector<std::size_t> serving_ap;
};

inline SEReport evaluate_all(const EstimationStats& st, const AgingProfile& profile)
{
    SEReport r;
    const std::size_t K = st.num_ues();
    for (std::size_t k = 0; k < K; ++k)
    {
        r.se_lsfd.push_back(se_cf(k, st, profile, CombiningMode::LSFD));
        r.se_mf.push_back(se_cf(k, st, profile, CombiningMode::MF));
        const auto sel = select_best_ap(k, st, profile);
        r.serving_ap.push_back(sel.ap);
        r.se_smallcell.push_back(sel.se);
    }
    return r;
}

} // namespace cfaging
