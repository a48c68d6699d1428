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

#include <Eigen/Eigenvalues>

#include "cfaging/aging.hpp"
#include "cfaging/parallel.hpp"
#include "cfaging/rng.hpp"
#include "cfaging/se_engine.hpp"

namespace cfaging {

/// How the intra-block time series is realized.
///
/// Stationary draws each (k,l) series from the Toeplitz covariance J0(2 pi f_D T_s |n-m|).
/// Anchored draws h[lambda] first and every other instant as
/// rho(|n-lambda|) h[lambda] + rho_bar(|n-lambda|) g[n] with independent innovations,
/// which is exactly the structure the closed forms are derived under.
enum class ChannelModel
{
    Stationary,
    Anchored
};

/// h_kl[n] for n = 0..tau_c of one resource block.
struct ChannelBlock
{
    std::size_t num_ues = 0;
    std::size_t num_aps = 0;
    std::size_t length = 0; // tau_c + 1
    std::vector<Complex> h;
    std::uint64_t rng_seed = 0;

    Complex& at(std::size_t k, std::size_t l, std::size_t n) { return h[(k * num_aps + l) * length + n]; }
    const Complex& at(std::size_t k, std::size_t l, std::size_t n) const { return h[(k * num_aps + l) * length + n]; }
};

/// Reusable generator; the per-UE Toeplitz factors are computed once.
class ChannelGenerator
{
public:
    ChannelGenerator(const RealMatrix& beta, const AgingProfile& profile, ChannelModel model, std::size_t lambda)
        : beta_(beta), profile_(profile), model_(model), lambda_(lambda)
    {
        const std::size_t T = profile.tau_c() + 1;
        if (model == ChannelModel::Anchored && lambda >= T)
            throw std::invalid_argument("ChannelGenerator: anchor instant outside the block");
        if (model == ChannelModel::Stationary)
        {
            factors_.resize(profile.num_ues());
            for (std::size_t k = 0; k < profile.num_ues(); ++k)
            {
                const auto& rho = profile.rho[k];
                if (is_static(k))
                    continue;
                RealMatrix toeplitz(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
                for (std::size_t n = 0; n < T; ++n)
                    for (std::size_t m = 0; m < T; ++m)
                        toeplitz(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = rho[n > m ? n - m : m - n];
                Eigen::SelfAdjointEigenSolver<RealMatrix> eig(toeplitz);
                if (eig.info() != Eigen::Success)
                    throw std::runtime_error("ChannelGenerator: Toeplitz eigendecomposition failed");
                const RealVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
                factors_[k] = eig.eigenvectors() * root.asDiagonal();
            }
        }
    }

    void generate(Rng& rng, ChannelBlock& block)
    {
        const std::size_t K = static_cast<std::size_t>(beta_.rows());
        const std::size_t L = static_cast<std::size_t>(beta_.cols());
        const std::size_t T = profile_.tau_c() + 1;
        block.num_ues = K;
        block.num_aps = L;
        block.length = T;
        block.h.resize(K * L * T);
        ComplexVector x(static_cast<Eigen::Index>(T));
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l)
            {
                const double amp = std::sqrt(beta_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)));
                if (is_static(k))
                {
                    const Complex v = amp * cn_(rng);
                    for (std::size_t n = 0; n < T; ++n)
                        block.at(k, l, n) = v;
                }
                else if (model_ == ChannelModel::Stationary)
                {
                    for (std::size_t n = 0; n < T; ++n)
                        x[static_cast<Eigen::Index>(n)] = cn_(rng);
                    const ComplexVector y = factors_[k] * x;
                    for (std::size_t n = 0; n < T; ++n)
                        block.at(k, l, n) = amp * y[static_cast<Eigen::Index>(n)];
                }
                else
                {
                    const Complex anchor = amp * cn_(rng);
                    for (std::size_t n = 0; n < T; ++n)
                    {
                        if (n == lambda_)
                        {
                            block.at(k, l, n) = anchor;
                            continue;
                        }
                        const std::size_t lag = n > lambda_ ? n - lambda_ : lambda_ - n;
                        block.at(k, l, n) = profile_.at(k, lag) * anchor + profile_.bar(k, lag) * amp * cn_(rng);
                    }
                }
            }
    }

private:
    bool is_static(std::size_t k) const
    {
        for (double r : profile_.rho[k])
            if (r != 1.0)
                return false;
        return true;
    }

    RealMatrix beta_;
    AgingProfile profile_;
    ChannelModel model_;
    std::size_t lambda_;
    std::vector<RealMatrix> factors_;
    ComplexGaussian cn_;
};

inline ChannelBlock generate_channel_block(const NetworkScenario& sc, const AgingProfile& profile, std::uint64_t seed,
                                           ChannelModel model = ChannelModel::Stationary, std::size_t lambda = 0)
{
    ChannelGenerator gen(sc.beta, profile, model, lambda);
    Rng rng(seed);
    ChannelBlock block;
    block.rng_seed = seed;
    gen.generate(rng, block);
    return block;
}

/// Pilot phase: z_l[t] = sum_{i: t_i = t} sqrt(p_i) h_il[t] + w_l[t] with fresh noise per (l, t),
/// followed by the per-AP MMSE estimate. Returns K x L estimates of h_kl[lambda].
inline Eigen::MatrixXcd simulate_pilot_phase(const ChannelBlock& block, const EstimationStats& st,
                                             const AgingProfile& profile, Rng& rng)
{
    const std::size_t K = st.num_ues();
    const std::size_t L = st.num_aps();
    ComplexGaussian cn;
    Eigen::MatrixXcd est(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(L));
    std::vector<Complex> z(L);
    for (std::size_t t = 1; t <= st.pilots.tau_p; ++t)
    {
        for (std::size_t l = 0; l < L; ++l)
        {
            Complex acc = cn(rng, st.noise_power);
            for (std::size_t i = 0; i < K; ++i)
                if (st.pilots.t[i] == t)
                    acc += std::sqrt(st.powers[static_cast<Eigen::Index>(i)]) * block.at(i, l, t);
            z[l] = acc;
        }
        for (std::size_t k = 0; k < K; ++k)
            if (st.pilots.t[k] == t)
                for (std::size_t l = 0; l < L; ++l)
                    est(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = mmse_estimate(z[l], k, l, st, profile);
    }
    return est;
}

/// Weights for every UE and data instant: weights[k][n - lambda].
using WeightTable = std::vector<std::vector<ComplexVector>>;

inline WeightTable weight_table(CombiningMode mode, const EstimationStats& st, const AgingProfile& profile)
{
    WeightTable w(st.num_ues());
    for (std::size_t k = 0; k < st.num_ues(); ++k)
        for (std::size_t n = st.lambda; n <= profile.tau_c(); ++n)
            w[k].push_back(combining_weights(mode, k, n, st, profile).a);
    return w;
}

/// Second moments of the five terms of the combined data estimate, indexed [k][n - lambda]
/// (ui is [k][i][n - lambda]; ui[k][k] is unused and zero).
struct TermEstimates
{
    std::vector<std::vector<double>> ds, bu, ca, ns;
    std::vector<std::vector<std::vector<double>>> ui;
    // standard errors of the matching estimates (zero for closed forms)
    std::vector<std::vector<double>> ds_se, bu_se, ca_se, ns_se;
    std::vector<std::vector<std::vector<double>>> ui_se;
    std::size_t n_samples = 0;

    void resize(std::size_t K, std::size_t instants)
    {
        for (auto* v : {&ds, &bu, &ca, &ns, &ds_se, &bu_se, &ca_se, &ns_se})
            v->assign(K, std::vector<double>(instants, 0.0));
        ui.assign(K, std::vector<std::vector<double>>(K, std::vector<double>(instants, 0.0)));
        ui_se = ui;
    }

    double interference(std::size_t k, std::size_t idx) const
    {
        double s = bu[k][idx] + ca[k][idx] + ns[k][idx];
        for (std::size_t i = 0; i < ui[k].size(); ++i)
            if (i != k)
                s += ui[k][i][idx];
        return s;
    }

    double sinr(std::size_t k, std::size_t idx) const
    {
        const double den = interference(k, idx);
        return den > 0.0 ? ds[k][idx] / den : 0.0;
    }
};

/// Closed-form expectations of the five terms for the given weights.
inline TermEstimates analytic_terms(const EstimationStats& st, const AgingProfile& profile, const WeightTable& weights)
{
    const std::size_t K = st.num_ues();
    const std::size_t L = st.num_aps();
    const std::size_t instants = profile.tau_c() + 1 - st.lambda;
    TermEstimates t;
    t.resize(K, instants);
    for (std::size_t k = 0; k < K; ++k)
    {
        const auto kk = static_cast<Eigen::Index>(k);
        const double pk = st.powers[kk];
        for (std::size_t idx = 0; idx < instants; ++idx)
        {
            const ComplexVector& a = weights[k][idx];
            const double rk = profile.at(k, idx);
            const double rbk = profile.bar(k, idx);
            Complex ab{0.0, 0.0};
            double own = 0.0;
            double lam = 0.0;
            for (std::size_t l = 0; l < L; ++l)
            {
                const auto ll = static_cast<Eigen::Index>(l);
                const double g = st.gamma(kk, ll);
                ab += std::conj(a[ll]) * g;
                own += std::norm(a[ll]) * g * st.beta(kk, ll);
                lam += std::norm(a[ll]) * g;
            }
            t.ds[k][idx] = rk * rk * pk * std::norm(ab);
            t.bu[k][idx] = rk * rk * pk * own;
            t.ca[k][idx] = rbk * rbk * pk * own;
            t.ns[k][idx] = st.noise_power * lam;
            for (std::size_t i = 0; i < K; ++i)
            {
                if (i == k)
                    continue;
                const auto ii = static_cast<Eigen::Index>(i);
                double incoherent = 0.0;
                Complex ac{0.0, 0.0};
                for (std::size_t l = 0; l < L; ++l)
                {
                    const auto ll = static_cast<Eigen::Index>(l);
                    incoherent += std::norm(a[ll]) * st.gamma(kk, ll) * st.beta(ii, ll);
                    ac += std::conj(a[ll]) * std::sqrt(st.gamma(kk, ll) * st.gamma(ii, ll));
                }
                double v = st.powers[ii] * incoherent;
                if (st.pilots.shares(k, i))
                {
                    const double ri = profile.at(i, idx);
                    v += ri * ri * st.powers[ii] * std::norm(ac);
                }
                t.ui[k][i][idx] = v;
            }
        }
    }
    return t;
}

struct OracleOptions
{
    ChannelModel model = ChannelModel::Anchored;
    bool explicit_symbols = false; // draw s_i[n] and w_l[n] instead of conditioning them out
    std::size_t shard_size = 1000;
    std::size_t workers = default_workers();
};

namespace detail {

// Running sums for one (k, instant) cell: first and second moments of each term sample.
struct TermSums
{
    Complex x{0.0, 0.0};  // sum of X (desired-signal coefficient)
    double x2 = 0.0;      // sum |X s|^2
    double x4 = 0.0;
    double s2 = 0.0;      // sum |s_k|^2 (explicit mode)
    double ca = 0.0, ca2 = 0.0;
    double ns = 0.0, ns2 = 0.0;
    std::vector<double> ui, ui2;
};

inline void accumulate(std::vector<TermSums>& into, const std::vector<TermSums>& from)
{
    for (std::size_t c = 0; c < into.size(); ++c)
    {
        auto& a = into[c];
        const auto& b = from[c];
        a.x += b.x;
        a.x2 += b.x2;
        a.x4 += b.x4;
        a.s2 += b.s2;
        a.ca += b.ca;
        a.ca2 += b.ca2;
        a.ns += b.ns;
        a.ns2 += b.ns2;
        for (std::size_t i = 0; i < a.ui.size(); ++i)
        {
            a.ui[i] += b.ui[i];
            a.ui2[i] += b.ui2[i];
        }
    }
}

inline double mean_se(double sum, double sum2, double n)
{
    const double m = sum / n;
    const double var = std::max(0.0, sum2 / n - m * m);
    return std::sqrt(var / n);
}

} // namespace detail

/// Monte Carlo estimates of the term expectations for every UE and data instant.
///
/// Each block draws channels, runs the pilot phase and evaluates the terms with the
/// simulated estimates and channels. By default the unit-variance data symbols and the
/// data-phase noise are conditioned out analytically (each sample is multiplied by p_i,
/// resp. replaced by sigma^2 sum_l |a_l|^2 |h_hat_kl|^2).
inline TermEstimates estimate_sinr_terms(const EstimationStats& st, const AgingProfile& profile,
                                         const WeightTable& weights, std::size_t n_blocks, std::uint64_t seed,
                                         const OracleOptions& opt = {})
{
    if (n_blocks < 100)
        throw std::invalid_argument("estimate_sinr_terms: at least 100 blocks are required");
    const std::size_t K = st.num_ues();
    const std::size_t L = st.num_aps();
    const std::size_t lambda = st.lambda;
    const std::size_t instants = profile.tau_c() + 1 - lambda;
    const std::size_t cells = K * instants;
    const std::size_t shards = (n_blocks + opt.shard_size - 1) / opt.shard_size;

    auto run_shard = [&](std::size_t shard) {
        std::vector<detail::TermSums> sums(cells);
        for (auto& c : sums)
        {
            c.ui.assign(K, 0.0);
            c.ui2.assign(K, 0.0);
        }
        ChannelGenerator gen(st.beta, profile, opt.model, lambda);
        Rng rng(derive_seed(seed, shard));
        ComplexGaussian cn;
        ChannelBlock block;
        std::vector<Complex> sym(K);
        std::vector<Complex> noise(L);
        const std::size_t begin = shard * opt.shard_size;
        const std::size_t end = std::min(n_blocks, begin + opt.shard_size);
        for (std::size_t b = begin; b < end; ++b)
        {
            gen.generate(rng, block);
            const Eigen::MatrixXcd est = simulate_pilot_phase(block, st, profile, rng);
            for (std::size_t idx = 0; idx < instants; ++idx)
            {
                const std::size_t n = lambda + idx;
                if (opt.explicit_symbols)
                {
                    for (std::size_t i = 0; i < K; ++i)
                        sym[i] = cn(rng, st.powers[static_cast<Eigen::Index>(i)]);
                    for (std::size_t l = 0; l < L; ++l)
                        noise[l] = cn(rng, st.noise_power);
                }
                for (std::size_t k = 0; k < K; ++k)
                {
                    const ComplexVector& a = weights[k][idx];
                    const double rk = profile.at(k, idx);
                    auto& c = sums[k * instants + idx];
                    Complex x{0.0, 0.0}, y{0.0, 0.0}, nsv{0.0, 0.0};
                    double ns_cond = 0.0;
                    for (std::size_t l = 0; l < L; ++l)
                    {
                        const Complex coef = std::conj(a[static_cast<Eigen::Index>(l)])
                            * std::conj(est(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)));
                        const Complex anchor = block.at(k, l, lambda);
                        x += coef * anchor;
                        // rho_bar * innovation = h[n] - rho h[lambda]
                        y += coef * (block.at(k, l, n) - rk * anchor);
                        if (opt.explicit_symbols)
                            nsv += coef * noise[l];
                        else
                            ns_cond += std::norm(coef);
                    }
                    x *= rk;
                    double xs2, ca, nsq, s2;
                    if (opt.explicit_symbols)
                    {
                        s2 = std::norm(sym[k]);
                        xs2 = std::norm(x) * s2;
                        ca = std::norm(y) * s2;
                        nsq = std::norm(nsv);
                    }
                    else
                    {
                        s2 = st.powers[static_cast<Eigen::Index>(k)];
                        xs2 = std::norm(x) * s2;
                        ca = std::norm(y) * s2;
                        nsq = st.noise_power * ns_cond;
                    }
                    c.x += x;
                    c.x2 += xs2;
                    c.x4 += xs2 * xs2;
                    c.s2 += s2;
                    c.ca += ca;
                    c.ca2 += ca * ca;
                    c.ns += nsq;
                    c.ns2 += nsq * nsq;
                    for (std::size_t i = 0; i < K; ++i)
                    {
                        if (i == k)
                            continue;
                        Complex z{0.0, 0.0};
                        for (std::size_t l = 0; l < L; ++l)
                            z += std::conj(a[static_cast<Eigen::Index>(l)])
                                * std::conj(est(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)))
                                * block.at(i, l, n);
                        const double v = std::norm(z)
                            * (opt.explicit_symbols ? std::norm(sym[i]) : st.powers[static_cast<Eigen::Index>(i)]);
                        c.ui[i] += v;
                        c.ui2[i] += v * v;
                    }
                }
            }
        }
        return sums;
    };

    auto partials = parallel_map(shards, opt.workers, run_shard);
    const auto total = pairwise_reduce(std::move(partials), [](std::vector<detail::TermSums> a,
                                                               const std::vector<detail::TermSums>& b) {
        detail::accumulate(a, b);
        return a;
    });

    TermEstimates t;
    t.resize(K, instants);
    t.n_samples = n_blocks;
    const double N = static_cast<double>(n_blocks);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t idx = 0; idx < instants; ++idx)
        {
            const auto& c = total[k * instants + idx];
            const Complex mx = c.x / N;
            const double ms2 = c.s2 / N;
            const double m_x2 = c.x2 / N;
            const double coherent = std::norm(mx) * ms2;
            t.ds[k][idx] = coherent;
            t.bu[k][idx] = std::max(0.0, m_x2 - coherent);
            t.ca[k][idx] = c.ca / N;
            t.ns[k][idx] = c.ns / N;
            // delta method for |mean X|^2 p: relative SE ~ 2 SE(mean X)/|mean X|
            const double var_x = std::max(0.0, m_x2 / ms2 - std::norm(mx));
            t.ds_se[k][idx] = std::abs(mx) > 0.0 ? 2.0 * std::abs(mx) * std::sqrt(var_x / N) * ms2 : 0.0;
            t.bu_se[k][idx] = detail::mean_se(c.x2, c.x4, N);
            t.ca_se[k][idx] = detail::mean_se(c.ca, c.ca2, N);
            t.ns_se[k][idx] = detail::mean_se(c.ns, c.ns2, N);
            for (std::size_t i = 0; i < K; ++i)
            {
                t.ui[k][i][idx] = c.ui[i] / N;
                t.ui_se[k][i][idx] = detail::mean_se(c.ui[i], c.ui2[i], N);
            }
        }
    return t;
}

/// Single-instant convenience wrapper: weights[k] for data instant n.
inline TermEstimates estimate_sinr_terms(const EstimationStats& st, const AgingProfile& profile,
                                         const std::vector<WeightVector>& weights, std::size_t n,
                                         std::size_t n_blocks, std::uint64_t seed, const OracleOptions& opt = {})
{
    WeightTable table(st.num_ues());
    const std::size_t instants = profile.tau_c() + 1 - st.lambda;
    for (std::size_t k = 0; k < st.num_ues(); ++k)
        table[k].assign(instants, weights.at(k).a);
    auto all = estimate_sinr_terms(st, profile, table, n_blocks, seed, opt);
    const std::size_t idx = n - st.lambda;
    TermEstimates one;
    one.resize(st.num_ues(), 1);
    one.n_samples = all.n_samples;
    for (std::size_t k = 0; k < st.num_ues(); ++k)
    {
        one.ds[k][0] = all.ds[k][idx];
        one.bu[k][0] = all.bu[k][idx];
        one.ca[k][0] = all.ca[k][idx];
        one.ns[k][0] = all.ns[k][idx];
        one.ds_se[k][0] = all.ds_se[k][idx];
        one.bu_se[k][0] = all.bu_se[k][idx];
        one.ca_se[k][0] = all.ca_se[k][idx];
        one.ns_se[k][0] = all.ns_se[k][idx];
        for (std::size_t i = 0; i < st.num_ues(); ++i)
        {
            one.ui[k][i][0] = all.ui[k][i][idx];
            one.ui_se[k][i][0] = all.ui_se[k][i][idx];
        }
    }
    return one;
}

struct MonteCarloValue
{
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo average of the single-AP SE with the conditional interference power
/// E{|d[n]|^2 | h_hat_kl} evaluated analytically around each simulated estimate.
inline MonteCarloValue estimate_se_smallcell_mc(std::size_t k, std::size_t l, const EstimationStats& st,
                                                const AgingProfile& profile, std::size_t n_blocks,
                                                std::uint64_t seed, std::size_t workers = default_workers())
{
    const auto kk = static_cast<Eigen::Index>(k);
    const auto ll = static_cast<Eigen::Index>(l);
    if (st.gamma(kk, ll) <= 0.0)
        return {};
    const std::size_t tau_c = profile.tau_c();
    const auto& sharers = st.pilots.sharing_sets[k];
    constexpr std::size_t shard_size = 1000;
    const std::size_t shards = (n_blocks + shard_size - 1) / shard_size;

    struct Sums
    {
        double s = 0.0;
        double s2 = 0.0;
    };
    auto run_shard = [&](std::size_t shard) {
        Rng rng(derive_seed(seed, shard));
        ComplexGaussian cn;
        Sums acc;
        std::vector<Complex> est_shared(sharers.size());
        const std::size_t begin = shard * shard_size;
        const std::size_t end = std::min(n_blocks, begin + shard_size);
        for (std::size_t b = begin; b < end; ++b)
        {
            // z_l[t_k] from the channels of all pilot sharers at their (common) pilot instant
            Complex z = cn(rng, st.noise_power);
            for (std::size_t i : sharers)
                z += std::sqrt(st.powers[static_cast<Eigen::Index>(i)])
                    * cn(rng, st.beta(static_cast<Eigen::Index>(i), ll));
            for (std::size_t j = 0; j < sharers.size(); ++j)
                est_shared[j] = mmse_estimate(z, sharers[j], l, st, profile);
            const double hk2 = std::norm(mmse_estimate(z, k, l, st, profile));

            double se = 0.0;
            for (std::size_t n = st.lambda; n <= tau_c; ++n)
            {
                const std::size_t lag = n - st.lambda;
                double cond = st.received_power[ll] + st.noise_power;
                for (std::size_t j = 0; j < sharers.size(); ++j)
                {
                    const std::size_t i = sharers[j];
                    const double ri = profile.at(i, lag);
                    const double pi = st.powers[static_cast<Eigen::Index>(i)];
                    cond -= ri * ri * pi * st.gamma(static_cast<Eigen::Index>(i), ll);
                    if (i != k)
                        cond += ri * ri * pi * std::norm(est_shared[j]);
                }
                const double rk = profile.at(k, lag);
                se += std::log2(1.0 + rk * rk * st.powers[kk] * hk2 / cond);
            }
            se /= static_cast<double>(tau_c);
            acc.s += se;
            acc.s2 += se * se;
        }
        return acc;
    };
    auto partials = parallel_map(shards, workers, run_shard);
    const Sums total = pairwise_reduce(std::move(partials), [](Sums a, const Sums& b) {
        a.s += b.s;
        a.s2 += b.s2;
        return a;
    });
    const double N = static_cast<double>(n_blocks);
    return {total.s / N, detail::mean_se(total.s, total.s2, N)};
}

} // namespace cfaging
