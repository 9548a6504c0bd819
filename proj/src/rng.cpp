// SPDX-License-Identifier: Apache-2.0
//
// beamsync-sim: over-the-air phase and frequency synchronization between distributed APs
// Copyright (C) 2026 The beamsync-sim authors
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

#include "beamsync/rng.hpp"

#include <cmath>

namespace beamsync
{
    // splitmix64 finalizer
    std::uint64_t mix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    Rng Rng::for_trial(std::uint64_t seed, std::uint64_t point_index, std::uint64_t trial_index)
    {
        return Rng(mix64(mix64(mix64(seed) ^ point_index) ^ trial_index));
    }

    Rng Rng::derive(std::uint64_t tag) const
    {
        return Rng(mix64(seed_ ^ mix64(tag + 0x5851f42d4c957f2dULL)));
    }

    double Rng::normal() { return normal_(engine_); }

    double Rng::uniform(double lo, double hi)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    std::complex<double> Rng::complex_normal(double variance)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }
}
