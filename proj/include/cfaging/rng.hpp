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

#include <cstdint>
#include <random>

#include "cfaging/types.hpp"

namespace cfaging {

/// SplitMix64 finalizer; used to derive independent sub-seeds from (seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
    return mix_seed(mix_seed(base) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

/// Draws CN(0, variance).
class ComplexGaussian
{
public:
    Complex operator()(Rng& rng, double variance = 1.0)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(rng);
        const double im = normal_(rng);
        return {s * re, s * im};
    }

private:
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace cfaging
