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

#ifndef BEAMSYNC_CHANNEL_H
#define BEAMSYNC_CHANNEL_H

#include "beamsync/cmatrix.hpp"
#include "beamsync/rng.hpp"

#include <cstddef>
#include <span>

namespace beamsync
{
    // Reciprocal channel between AP A (rows) and AP B (columns)
    struct ChannelRealization
    {
        CMat G;
    };

    struct NoiseModel
    {
        double sigma2 = 1.0;
    };

    ChannelRealization draw_rayleigh(std::size_t M_A, std::size_t M_B, Rng &rng);

    // D_rA G D_rB
    CMat effective_channel(const ChannelRealization &ch, std::span<const cplx> rA, std::span<const cplx> rB);

    NoiseModel snr_to_sigma2(double snr_db);

    CMat awgn(std::size_t rows, std::size_t cols, double sigma2, Rng &rng);
    void add_awgn(CMat &Y, double sigma2, Rng &rng);
}

#endif
