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

#ifndef BEAMSYNC_PHASE_SYNC_H
#define BEAMSYNC_PHASE_SYNC_H

#include "beamsync/channel.hpp"
#include "beamsync/cmatrix.hpp"
#include "beamsync/hardware.hpp"
#include "beamsync/rng.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>

namespace beamsync
{
    struct PilotMatrix
    {
        std::size_t L = 0;
        std::size_t M = 0;
        CMat Phi; // L x M, orthonormal columns
    };

    struct SyncSignal
    {
        CVec x;
        std::size_t N() const { return x.size(); }
    };

    enum class Estimator
    {
        simple,
        nls,
        pcsi
    };

    struct PhaseTrace
    {
        CMat Y_B1;
        CVec a;
        CMat Y_A1;
        double c = 0.0;
        CMat Y_B2;
        double phi_hat = 0.0;
        double phi_true = 0.0;
        double error = 0.0;
    };

    struct PhaseKnobs
    {
        std::size_t L = 16;
        std::size_t N = 100;
        double sigma2 = 1.0;
        Estimator estimator = Estimator::simple;
        bool phase_noise = false;       // Wiener LO phase over the L + 2N samples
        double residual_delta_hz = 0.0; // uncorrected carrier offset during stages II and III
        double T = kSymbolTimeS;
    };

    class DegenerateEstimateError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    enum class Link
    {
        a_to_b, // received through G^T
        b_to_a  // received through G
    };

    // D_r(rx) H D_e(tx) X D_theta + W; column k of the signal part is rotated by exp(j column_phase[k])
    CMat over_the_air(Link link, const ApState &tx, const ApState &rx, const ChannelRealization &ch, const CMat &X,
                      double sigma2, Rng &rng, std::span<const double> column_phase = {});

    PilotMatrix make_pilot(std::size_t L, std::size_t M);
    SyncSignal make_sync_signal(std::size_t N, Rng &rng);

    // A sends its pilot, B receives (M_B x L)
    CMat stage1_phase(const ApState &apA, const ApState &apB, const ChannelRealization &ch, const NoiseModel &noise,
                      const PilotMatrix &pilot, Rng &rng, std::span<const double> column_phase = {});

    CVec estimate_beam_direction(const CMat &Y_B1);

    // B beamforms x along a, A receives (M_A x N)
    CMat stage2_phase(const ApState &apB, const ApState &apA, std::span<const cplx> a, const SyncSignal &x,
                      const ChannelRealization &ch, const NoiseModel &noise, Rng &rng,
                      std::span<const double> column_phase = {});

    struct Stage3Result
    {
        CMat Y_B2;
        double c = 0.0;
    };

    // A echoes the scaled conjugate of what it received, B receives (M_B x N)
    Stage3Result stage3_phase(const ApState &apA, const ApState &apB, const CMat &Y_A1, const ChannelRealization &ch,
                              const NoiseModel &noise, Rng &rng, std::span<const double> column_phase = {});

    double simple_phase_estimate(std::span<const cplx> a, const CMat &Y_B2, const SyncSignal &x);
    double nls_phase_estimate(const CMat &Y_B2, std::span<const cplx> a, const SyncSignal &x, const CMat &G_e, double c2);

    // sqrt(c) |t_1| / |r_1| of the echoing AP
    double nls_noise_scale(double c, const ApState &apA);

    // (K a*)^H (I + c2^2 K)^-1 (K a*), K = G_e^T G_e*
    double whitened_beam_gain(const CMat &G_e, double c2, std::span<const cplx> a);

    // Dominant right singular vector of G_e
    CVec dominant_right_vector(const CMat &G_e);

    PhaseTrace run_phase_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch, const PhaseKnobs &knobs,
                                  Rng &rng);

    // Per-sample rotations applied to the three stages under LO phase noise and residual CFO
    struct StagePhases
    {
        std::vector<double> stage1;
        std::vector<double> stage2;
        std::vector<double> stage3;
    };

    StagePhases phase_protocol_rotations(ApState &apA, ApState &apB, const PhaseKnobs &knobs, Rng &rng);
}

#endif
