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

#ifndef BEAMSYNC_FREQ_SYNC_H
#define BEAMSYNC_FREQ_SYNC_H

#include "beamsync/channel.hpp"
#include "beamsync/cmatrix.hpp"
#include "beamsync/hardware.hpp"
#include "beamsync/phase_sync.hpp"
#include "beamsync/rng.hpp"

#include <cstddef>
#include <vector>

namespace beamsync
{
    struct FreqOffsetTruth
    {
        double delta = 0.0;      // Hz
        double T = kSymbolTimeS; // s
        double delta_norm = 0.0; // cycles/sample
    };

    struct FreqTrace
    {
        CMat Y_A;
        CVec a_f;
        CMat Y_B;
        double delta_true = 0.0;
        double delta_hat = 0.0;
        CVec b_hat;
        bool boundary = false;
        double crb = 0.0;   // (cycles/sample)^2 at the true b
        double error = 0.0; // cycles/sample
    };

    struct FreqSearch
    {
        double lo_hz = -300.0;
        double hi_hz = 300.0;
        std::size_t grid = 512;
        double tol_hz = 1e-4;
        double T = kSymbolTimeS;
    };

    struct FreqEstimate
    {
        double delta_hat = 0.0;
        CVec b_hat;
        bool boundary = false; // coarse maximum sat on the edge of the search range
    };

    struct FreqKnobs
    {
        std::size_t L_B = 16;
        std::size_t N_f = 10;
        double sigma2 = 1.0;
        FreqSearch search;
        bool pcsi = false;
    };

    // Offset of A's oscillator relative to B's
    FreqOffsetTruth freq_offset_truth(const ApState &apA, const ApState &apB, double T);

    CVec make_freq_sync_signal(std::size_t N_f);

    // exp(j 2 pi k delta T), k = 1..tau
    CVec rotation_vector(double delta, double T, std::size_t tau);

    // B sends its pilot, A receives (M_A x L_B)
    CMat stage1_freq(const ApState &apB, const ApState &apA, const ChannelRealization &ch, const NoiseModel &noise,
                     double delta, double T, const PilotMatrix &pilot_B, Rng &rng);

    CVec estimate_beam_direction_freq(const CMat &Y_A);

    // A beamforms x_f along a_f, B receives with the conjugate rotation (M_B x N_f)
    CMat stage2_freq(const ApState &apA, const ApState &apB, std::span<const cplx> a_f, std::span<const cplx> x_f,
                     const ChannelRealization &ch, const NoiseModel &noise, double delta, double T, Rng &rng);

    // ||Y_B D_delta x_f||^2
    double freq_objective(const CMat &Y_B, std::span<const cplx> x_f, double delta, double T);

    FreqEstimate ml_freq_estimate(const CMat &Y_B, std::span<const cplx> x_f, const FreqSearch &search);

    struct FimResult
    {
        std::size_t dim = 0;
        std::vector<double> J; // row-major, parameters (Re b, Im b, delta T)
        double crb = 0.0;
    };

    FimResult fim_and_crb(std::span<const cplx> b, std::span<const cplx> x_f, double sigma2);
    double crb_closed_form(std::span<const cplx> b, std::span<const cplx> x_f, double sigma2);

    // sum n^2 x^2 - (sum n x^2)^2 / sum x^2
    double crb_denominator(std::span<const cplx> x_f);

    FreqTrace run_freq_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch, const FreqKnobs &knobs,
                                Rng &rng);
}

#endif
