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

#include "beamsync/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsync
{
    ChannelRealization draw_rayleigh(std::size_t M_A, std::size_t M_B, Rng &rng)
    {
        if (M_A == 0 || M_B == 0)
            throw std::invalid_argument("draw_rayleigh: dimensions must be >= 1");
        ChannelRealization ch{CMat(M_A, M_B)};
        for (auto &z : ch.G.data())
            z = rng.complex_normal();
        return ch;
    }

    CMat effective_channel(const ChannelRealization &ch, std::span<const cplx> rA, std::span<const cplx> rB)
    {
        if (rA.size() != ch.G.rows() || rB.size() != ch.G.cols())
            throw DimensionError("effective_channel: gains of length " + std::to_string(rA.size()) + " and " +
                                 std::to_string(rB.size()) + " vs channel " + ch.G.shape());
        return scale_cols(scale_rows(rA, ch.G), rB);
    }

    NoiseModel snr_to_sigma2(double snr_db) { return {std::pow(10.0, -snr_db / 10.0)}; }

    CMat awgn(std::size_t rows, std::size_t cols, double sigma2, Rng &rng)
    {
        CMat W(rows, cols);
        add_awgn(W, sigma2, rng);
        return W;
    }

    void add_awgn(CMat &Y, double sigma2, Rng &rng)
    {
        if (sigma2 < 0.0)
            throw std::invalid_argument("awgn: sigma2 must be >= 0");
        if (sigma2 == 0.0)
            return;
        for (auto &z : Y.data())
            z += rng.complex_normal(sigma2);
    }
}
