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

#ifndef BEAMSYNC_RNG_H
#define BEAMSYNC_RNG_H

#include <complex>
#include <cstdint>
#include <random>

namespace beamsync
{
    // Seeded random stream owned by one trial
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed);

        // Stream for one Monte-Carlo trial, independent of scheduling order
        static Rng for_trial(std::uint64_t seed, std::uint64_t point_index, std::uint64_t trial_index);

        // Child stream keyed by tag; does not advance this stream
        Rng derive(std::uint64_t tag) const;

        double normal();
        double uniform(double lo, double hi);
        std::complex<double> complex_normal(double variance = 1.0);

        std::uint64_t seed() const { return seed_; }
        std::mt19937_64 &engine() { return engine_; }

    private:
        std::uint64_t seed_;
        std::mt19937_64 engine_;
        std::normal_distribution<double> normal_{0.0, 1.0};
    };

    std::uint64_t mix64(std::uint64_t x);
}

#endif
