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


#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cfaging/se_engine.hpp"
#include "cfaging/specfun.hpp"
#include "fixtures.hpp"

using namespace cfaging;
using cfaging::testing::make_instance;
using cfaging::testing::manual_scenario;
using cfaging::testing::random_instance;

namespace {

ComplexVector real_weights(std::initializer_list<double> v)
{
    ComplexVector a(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        a[i++] = x;
    return a;
}

ComplexVector random_weights(std::mt19937_64& rng, std::size_t L)
{
    std::normal_distribution<double> g;
    ComplexVector a(static_cast<Eigen::Index>(L));
    for (Eigen::Index l = 0; l < a.size(); ++l)
        a[l] = Complex(g(rng), g(rng));
    return a;
}

// Dense solve of the LSFD normal equations, independent of the Woodbury path.
RealVector dense_lsfd(std::size_t k, std::size_t n, const EstimationStats& st, const AgingProfile& profile)
{
    const auto L = static_cast<Eigen::Index>(st.num_aps());
    const std::size_t lag = n - st.lambda;
    RealMatrix M = RealMatrix::Zero(L, L);
    for (std::size_t i = 0; i < st.num_ues(); ++i)
        M.diagonal() += st.powers[static_cast<Eigen::Index>(i)] * st.Gamma_diag(k, i);
    for (std::size_t i : st.pilots.sharing_sets[k])
        if (i != k)
        {
            const RealVector c = st.c(k, i);
            const double r = profile.at(i, lag);
            M += r * r * st.powers[static_cast<Eigen::Index>(i)] * c * c.transpose();
        }
    M.diagonal() += st.noise_power * st.Lambda_diag(k);
    return M.ldlt().solve(st.b(k));
}

// E{ln(1 + c X)}, X ~ Exp(1), by composite Simpson on [0, 80].
double expected_log(double c)
{
    const int n = 400000;
    const double h = 80.0 / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i)
    {
        const double u = i * h;
        const double f = std::exp(-u) * std::log1p(c * u);
        s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return s * h / 3.0;
}

} // namespace

TEST_CASE("sinr_cf hand-evaluated example", "[se_engine]")
{
    RealMatrix beta(1, 1);
    beta << 1.0;
    const auto in = make_instance(manual_scenario(beta, RealVector::Ones(1)), 1, 6, {0.0}, 1.0);
    CHECK(sinr_cf(0, 2, real_weights({1.0}), in.stats, in.profile) == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(sinr_cf(0, 2, ComplexVector::Zero(1), in.stats, in.profile) == 0.0);
}

TEST_CASE("sinr_cf vanishes when the data instant is aged out", "[se_engine]")
{
    // rho(3) = 0 while the pilot lag 1 keeps gamma > 0
    const double f = 2.404825557695773 / (2.0 * std::numbers::pi * 3.0);
    RealMatrix beta(2, 3);
    beta << 1.0, 0.5, 0.2, 0.3, 0.9, 0.1;
    const auto in = make_instance(manual_scenario(beta, RealVector::Ones(2)), 1, 10, {f}, 0.1);
    REQUIRE(in.stats.gamma(0, 0) > 0.0);
    const std::size_t n = in.stats.lambda + 3;
    CHECK(sinr_cf(0, n, lsfd_weights(0, n, in.stats, in.profile).a, in.stats, in.profile) < 1e-18);
    CHECK(smallcell_term(smallcell_instant(0, 0, n, in.stats, in.profile).w, 0.0) < 1e-12);
}

TEST_CASE("sinr_cf is invariant to weight scaling", "[se_engine]")
{
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t)
    {
        auto in = random_instance(rng, 5, 3, 2, 12, 0.004);
        const auto a = random_weights(rng, 5);
        const Complex c(std::exp(std::normal_distribution<double>()(rng)), -0.7);
        const double s1 = sinr_cf(0, 5, a, in.stats, in.profile);
        const double s2 = sinr_cf(0, 5, c * a, in.stats, in.profile);
        REQUIRE(std::abs(s1 - s2) <= 1e-12 * s1);
    }
}

TEST_CASE("LSFD weights", "[se_engine]")
{
    SECTION("L = 1 equals MF")
    {
        RealMatrix beta(3, 1);
        beta << 1.0, 0.4, 0.2;
        const auto in = make_instance(manual_scenario(beta, RealVector::Ones(3)), 2, 8, {0.01}, 0.2);
        for (std::size_t n = in.stats.lambda; n <= 8; ++n)
        {
            const double lsfd = sinr_cf(0, n, lsfd_weights(0, n, in.stats, in.profile).a, in.stats, in.profile);
            const double mf = sinr_cf(0, n, mf_weights(0, n, 1).a, in.stats, in.profile);
            REQUIRE(std::abs(lsfd - mf) <= 1e-12 * mf);
        }
    }
    SECTION("diagonal system without pilot sharing")
    {
        std::mt19937_64 rng(5);
        auto in = random_instance(rng, 6, 3, 3, 10, 0.002);
        const auto& st = in.stats;
        const auto w = lsfd_weights(1, 6, st, in.profile);
        for (Eigen::Index l = 0; l < 6; ++l)
        {
            double interf = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                interf += st.powers[static_cast<Eigen::Index>(i)] * st.gamma(1, l) * st.beta(static_cast<Eigen::Index>(i), l);
            const double expected = st.gamma(1, l) / (interf + st.noise_power * st.gamma(1, l));
            REQUIRE(std::abs(w.a[l].real() - expected) <= 1e-12 * expected);
            REQUIRE(w.a[l].imag() == 0.0);
        }
    }
    SECTION("Woodbury matches a dense solve")
    {
        std::mt19937_64 rng(8);
        for (int t = 0; t < 30; ++t)
        {
            auto in = random_instance(rng, 7, 6, 2, 15, 0.003 * (t % 4));
            for (std::size_t k = 0; k < 6; ++k)
                for (std::size_t n : {3UL, 9UL, 15UL})
                {
                    const RealVector fast = lsfd_weights(k, n, in.stats, in.profile).a.real();
                    const RealVector dense = dense_lsfd(k, n, in.stats, in.profile);
                    REQUIRE((fast - dense).norm() <= 1e-9 * dense.norm());
                }
        }
    }
    SECTION("LSFD beats random weights and MF")
    {
        std::mt19937_64 rng(13);
        auto in = random_instance(rng, 5, 3, 2, 12, 0.003);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t n = in.stats.lambda; n <= 12; ++n)
            {
                const double best = sinr_cf(k, n, lsfd_weights(k, n, in.stats, in.profile).a, in.stats, in.profile);
                REQUIRE(best >= sinr_cf(k, n, mf_weights(k, n, 5).a, in.stats, in.profile) * (1 - 1e-9));
                for (int trial = 0; trial < 1000; ++trial)
                    REQUIRE(best >= sinr_cf(k, n, random_weights(rng, 5), in.stats, in.profile) * (1 - 1e-9));
            }
    }
    SECTION("singular system falls back to MF")
    {
        // pilot fully decorrelated from the anchor: gamma = 0 on every AP
        RealMatrix beta(1, 2);
        beta << 1.0, 0.5;
        auto in = make_instance(manual_scenario(beta, RealVector::Ones(1)), 1, 5, {0.05}, 0.1);
        in.profile.rho[0][1] = 0.0;
        in.stats = estimation_variance(in.scenario, in.pilots, in.profile, 0.1);
        REQUIRE(in.stats.gamma.isZero(0.0));
        const auto w = lsfd_weights(0, 2, in.stats, in.profile);
        CHECK(w.degenerate);
        CHECK(w.a.isApprox(mf_weights(0, 2, 2).a));
    }
}

TEST_CASE("aging monotonicity at a fixed instant", "[se_engine]")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t)
    {
        auto in = random_instance(rng, 6, 4, 2, 16, 0.002);
        const std::size_t n = 10;
        const std::size_t lag = n - in.stats.lambda;
        const auto a = lsfd_weights(0, n, in.stats, in.profile).a;
        double prev = sinr_cf(0, n, a, in.stats, in.profile);
        AgingProfile weaker = in.profile;
        for (double r : {0.9, 0.6, 0.3, 0.0})
        {
            weaker.rho[0][lag] = r * in.profile.rho[0][lag];
            const double s = sinr_cf(0, n, a, in.stats, weaker);
            REQUIRE(s <= prev * (1 + 1e-12));
            prev = s;
        }
    }
}

TEST_CASE("static channel collapses the per-instant sum", "[se_engine]")
{
    std::mt19937_64 rng(2);
    auto in = random_instance(rng, 6, 4, 2, 20, 0.0);
    for (auto mode : {CombiningMode::LSFD, CombiningMode::MF})
    {
        const auto s = sinr_cf_instants(1, in.stats, in.profile, mode);
        REQUIRE(s.size() == 18);
        for (double v : s)
            REQUIRE(v == s.front());
        const double se = se_cf(1, in.stats, in.profile, mode);
        REQUIRE(std::abs(se / (18.0 / 20.0 * std::log2(1.0 + s.front())) - 1.0) < 1e-12);
    }
    for (std::size_t l = 0; l < 6; ++l)
    {
        const double first = smallcell_term(smallcell_instant(0, l, 3, in.stats, in.profile).w,
                                            smallcell_instant(0, l, 3, in.stats, in.profile).A);
        for (std::size_t n = 4; n <= 20; ++n)
        {
            const auto inst = smallcell_instant(0, l, n, in.stats, in.profile);
            REQUIRE(smallcell_term(inst.w, inst.A) == first);
        }
    }
}

TEST_CASE("single data instant when tau_p = tau_c - 1", "[se_engine]")
{
    std::mt19937_64 rng(4);
    auto in = random_instance(rng, 4, 3, 5, 6, 0.01);
    const auto s = sinr_cf_instants(0, in.stats, in.profile, CombiningMode::LSFD);
    REQUIRE(s.size() == 1);
    CHECK(se_cf(0, in.stats, in.profile, CombiningMode::LSFD) == Catch::Approx(std::log2(1 + s[0]) / 6.0));
}

TEST_CASE("small-cell per-instant term", "[se_engine]")
{
    SECTION("quadrature oracle")
    {
        for (double w : {0.05, 0.7, 3.0, 40.0})
            for (double A : {0.0, 0.01, 0.5, 2.0})
            {
                const double ref = (expected_log(w * (1.0 + A)) - expected_log(w * A)) / std::numbers::ln2;
                REQUIRE(std::abs(smallcell_term(w, A) - ref) <= 1e-7 * std::max(ref, 1e-3));
            }
    }
    SECTION("A = 0 limit")
    {
        for (double w : {0.01, 1.0, 100.0, 1e6})
        {
            const double x = 1.0 / w;
            REQUIRE(std::abs(smallcell_term(w, 0.0) - specfun::exp_e1_scaled(x) / std::numbers::ln2) < 1e-15);
            REQUIRE(std::abs(smallcell_term(w, 1e-310) - smallcell_term(w, 0.0)) < 1e-12);
        }
    }
    SECTION("finite, non-negative and decreasing in A")
    {
        for (double w : {1e-6, 0.3, 10.0, 1e8})
        {
            double prev = smallcell_term(w, 0.0);
            REQUIRE(std::isfinite(prev));
            for (double A = 1e-12; A < 1e12; A *= 3.7)
            {
                const double v = smallcell_term(w, A);
                REQUIRE(std::isfinite(v));
                REQUIRE(v >= 0.0);
                REQUIRE(v <= prev * (1 + 1e-9) + 1e-15);
                prev = v;
            }
            REQUIRE(smallcell_term(w, 1e12) < 1e-6);
        }
        CHECK(smallcell_term(0.0, 1.0) == 0.0);
    }
}

TEST_CASE("best-AP selection", "[se_engine]")
{
    SECTION("single AP")
    {
        RealMatrix beta(2, 1);
        beta << 1.0, 0.2;
        const auto in = make_instance(manual_scenario(beta, RealVector::Ones(2)), 1, 6, {0.0}, 0.1);
        CHECK(select_best_ap(0, in.stats, in.profile).ap == 0);
    }
    SECTION("zero-gain AP is never chosen")
    {
        RealMatrix beta(1, 3);
        beta << 0.0, 1e-3, 0.0;
        const auto in = make_instance(manual_scenario(beta, RealVector::Ones(1)), 1, 6, {0.0}, 0.1);
        const auto sel = select_best_ap(0, in.stats, in.profile);
        CHECK(sel.ap == 1);
        CHECK(sel.se > 0.0);
    }
    SECTION("pruned scan equals exhaustive and follows shuffled AP order")
    {
        std::mt19937_64 rng(17);
        for (int t = 0; t < 25; ++t)
        {
            auto in = random_instance(rng, 12, 5, 2, 20, 0.002 * (t % 3));
            std::vector<Eigen::Index> perm(12);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            RealMatrix shuffled(5, 12);
            for (Eigen::Index l = 0; l < 12; ++l)
                shuffled.col(l) = in.scenario.beta.col(perm[static_cast<std::size_t>(l)]);
            auto other = make_instance(manual_scenario(shuffled, in.scenario.powers), 2, 20,
                                       {0.002 * (t % 3)}, 0.01);
            for (std::size_t k = 0; k < 5; ++k)
            {
                const auto fast = select_best_ap(k, in.stats, in.profile);
                const auto full = select_best_ap_exhaustive(k, in.stats, in.profile);
                REQUIRE(fast.ap == full.ap);
                REQUIRE(fast.se == full.se);
                const auto moved = select_best_ap(k, other.stats, other.profile);
                REQUIRE(static_cast<std::size_t>(perm[moved.ap]) == fast.ap);
                REQUIRE(std::abs(moved.se - fast.se) <= 1e-14 * fast.se);
            }
        }
    }
}

TEST_CASE("drop report invariants", "[se_engine]")
{
    std::mt19937_64 rng(33);
    for (int t = 0; t < 10; ++t)
    {
        auto in = random_instance(rng, 8, 6, 3, 20, 0.001 * t);
        const auto r = evaluate_all(in.stats, in.profile);
        for (std::size_t k = 0; k < 6; ++k)
        {
            REQUIRE(r.se_lsfd[k] >= r.se_mf[k] - 1e-9);
            REQUIRE(r.se_mf[k] >= 0.0);
            REQUIRE(r.se_smallcell[k] >= 0.0);
            REQUIRE(r.serving_ap[k] < 8);
        }
    }
}
