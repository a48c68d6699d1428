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

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cfaging/specfun.hpp"
#include "oracles.hpp"

using namespace cfaging::specfun;
namespace oracle = cfaging::oracle;

TEST_CASE("bessel_j0 reference values", "[specfun]")
{
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(std::abs(bessel_j0(1.0) - 0.765197686557967) < 1e-14);
    const double root = oracle::bessel_j0_root(2.0, 3.0);
    CHECK(std::abs(root - 2.404825557695773) < 1e-12);
    CHECK(std::abs(bessel_j0(2.404825557695773)) <= 1e-9);
    CHECK(std::abs(bessel_j0(2.0 * std::numbers::pi * 0.2) - 0.6425118365775730) < 1e-12);
}

TEST_CASE("bessel_j0 matches the series oracle", "[specfun]")
{
    for (double x = 0.0; x <= 12.0; x += 0.173)
        REQUIRE(std::abs(bessel_j0(x) - oracle::bessel_j0_series(x)) <= 1e-10);
    for (double x = 12.0; x <= 50.0; x += 0.61)
        REQUIRE(std::abs(bessel_j0(x) - oracle::bessel_j0_series(x)) <= 1e-8);
    // both sides of the regime switch
    for (double x : {19.999, 20.0, 20.001})
        REQUIRE(std::abs(bessel_j0(x) - oracle::bessel_j0_series(x)) <= 1e-12);
}

TEST_CASE("bessel_j0 symmetry and range", "[specfun]")
{
    for (double x = 0.0; x < 60.0; x += 0.05)
    {
        REQUIRE(bessel_j0(x) == bessel_j0(-x));
        REQUIRE(bessel_j0(x) >= -0.4028);
        REQUIRE(bessel_j0(x) <= 1.0);
    }
    CHECK_THROWS_AS(bessel_j0(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(bessel_j0(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
}

TEST_CASE("exp_integral_e1 values and domain", "[specfun]")
{
    CHECK(std::abs(exp_integral_e1(1.0) / 0.219383934395520 - 1.0) < 1e-13);
    CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
    CHECK_THROWS_AS(exp_integral_e1(-1.0), std::domain_error);
    double prev = exp_integral_e1(1e-3);
    for (double x = 2e-3; x < 700.0; x *= 1.3)
    {
        const double v = exp_integral_e1(x);
        REQUIRE(v < prev);
        REQUIRE(v > 0.0);
        prev = v;
    }
    CHECK(exp_integral_e1(std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("exp_integral_e1 relative accuracy against the series oracle", "[specfun]")
{
    for (double x = 1e-6; x <= 700.0; x *= 1.45)
    {
        const double ref = oracle::exp_integral_e1_series(x);
        REQUIRE(std::abs(exp_integral_e1(x) / ref - 1.0) <= 1e-10);
    }
}

TEST_CASE("exp_e1_scaled", "[specfun]")
{
    CHECK(std::abs(exp_e1_scaled(1.0) / 0.596347362323194 - 1.0) < 1e-13);
    CHECK(std::abs(exp_e1_scaled(0.5) / 0.922910632483730 - 1.0) < 1e-13);
    CHECK_THROWS_AS(exp_e1_scaled(0.0), std::domain_error);

    const double big = exp_e1_scaled(1e6);
    CHECK(big > 1.0 / (1e6 + 1.0));
    CHECK(big < 1.0 / 1e6);

    SECTION("consistent with the unscaled product on (0, 100]")
    {
        for (double x = 0.01; x <= 100.0; x += 0.37)
        {
            const double s = exp_e1_scaled(x);
            REQUIRE(std::abs(s - std::exp(x) * exp_integral_e1(x)) / s <= 1e-9);
        }
    }
    SECTION("bracket 1/(x+1) < e^x E1(x) < 1/x")
    {
        for (double x = 1e-4; x <= 1e7; x *= 1.21)
        {
            const double s = exp_e1_scaled(x);
            REQUIRE(s > 1.0 / (x + 1.0));
            REQUIRE(s < 1.0 / x);
        }
    }
    SECTION("finite and bounded far past the exp overflow")
    {
        for (double x = 1e7; x <= 1e12; x *= 1.07)
        {
            const double s = exp_e1_scaled(x);
            REQUIRE(s >= 1.0 / (x + 1.0));
            REQUIRE(s <= 1.0 / x);
        }
        for (double x : {710.0, 1e3, 1e5, 1e9, 1e12, 1e200})
        {
            const double s = exp_e1_scaled(x);
            REQUIRE(std::isfinite(s));
            REQUIRE(s >= 1.0 / (x + 1.0));
            REQUIRE(s <= 1.0 / x);
        }
    }
    SECTION("accurate against the oracle up to 700")
    {
        for (double x = 1e-5; x <= 700.0; x *= 1.9)
            REQUIRE(std::abs(exp_e1_scaled(x) / oracle::exp_e1_scaled_series(x) - 1.0) <= 1e-10);
    }
}
