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
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cfaging::specfun {

inline constexpr double euler_gamma = 0.57721566490153286061;

namespace detail {

// Power series in long double; the largest term at |x| = 20 is ~7.6e6, which
// keeps the absolute cancellation error near 1e-12.
inline double bessel_j0_series(double x)
{
    const long double q = static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k)
    {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-21L)
            break;
    }
    return static_cast<double>(sum);
}

// Hankel expansion J0(x) ~ sqrt(2/(pi x)) (P cos(x - pi/4) - Q sin(x - pi/4)),
// truncated at the smallest term.
inline double bessel_j0_asymptotic(double x)
{
    double p = 1.0;
    double q = 0.0;
    double t = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 100; ++k)
    {
        const double odd = 2.0 * k - 1.0;
        t *= -(odd * odd) / (8.0 * k * x);
        if (std::fabs(t) >= prev || std::fabs(t) < 1e-18)
            break;
        prev = std::fabs(t);
        // t_k = a_k / x^k; P takes even k with alternating sign, Q the odd k.
        switch (k % 4)
        {
        case 0: p += t; break;
        case 1: q += t; break;
        case 2: p -= t; break;
        case 3: q -= t; break;
        }
    }
    const double chi = x - std::numbers::pi / 4.0;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Modified Lentz evaluation of e^x E1(x); converges quickly for x > 1.
inline double e1_scaled_continued_fraction(double x)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i)
    {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::fabs(del - 1.0) < eps)
            break;
    }
    return h;
}

// Same fraction written as 1/(x + 1 - t) with 0 < t < 1 and evaluated from the
// tail up. Monotone rounding then keeps the result inside [fl(1/(x+1)), fl(1/x)],
// which the forward recurrence does not guarantee once x exceeds ~1e8.
inline double e1_scaled_large(double x)
{
    double t = 0.0;
    for (int i = 12; i >= 1; --i)
        t = static_cast<double>(i) * i / (x + 1.0 + 2.0 * i - t);
    return 1.0 / (x + 1.0 - t);
}

inline double e1_series(double x)
{
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k)
    {
        term *= -x / k;
        const double contrib = -term / k;
        sum += contrib;
        if (std::fabs(contrib) < 1e-17 * std::fabs(sum))
            break;
    }
    return -euler_gamma - std::log(x) + sum;
}

} // namespace detail

/// Zeroth-order Bessel function of the first kind.
inline double bessel_j0(double x)
{
    if (!std::isfinite(x))
        throw std::domain_error("bessel_j0: argument must be finite");
    const double ax = std::fabs(x);
    if (ax <= 20.0)
        return detail::bessel_j0_series(ax);
    return detail::bessel_j0_asymptotic(ax);
}

/// Exponential integral E1(x) = int_1^inf e^{-xu}/u du, defined for x > 0.
inline double exp_integral_e1(double x)
{
    if (!(x > 0.0) || std::isnan(x))
        throw std::domain_error("exp_integral_e1: argument must be positive");
    if (std::isinf(x))
        return 0.0;
    if (x <= 1.0)
        return detail::e1_series(x);
    return std::exp(-x) * detail::e1_scaled_continued_fraction(x);
}

/// e^x E1(x) without forming the product, finite for every positive double.
/// Lies strictly inside (1/(x+1), 1/x) wherever binary64 can resolve the gap.
inline double exp_e1_scaled(double x)
{
    if (!(x > 0.0) || std::isnan(x))
        throw std::domain_error("exp_e1_scaled: argument must be positive");
    if (std::isinf(x))
        return 0.0;
    if (x <= 1.0)
        return std::exp(x) * detail::e1_series(x);
    if (x >= 1e4)
        return detail::e1_scaled_large(x);
    return detail::e1_scaled_continued_fraction(x);
}

} // namespace cfaging::specfun
