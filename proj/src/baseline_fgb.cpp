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

#include "beamsync/baseline_fgb.hpp"

#include <algorithm>
#include <cmath>

namespace beamsync
{
    namespace
    {
        // Reverse-direction selection pilot, kept off the main trial stream
        constexpr std::uint64_t kReversePilotTag = 0xfb0001;

        // Length-L unit-power pilot sent on a single transmit beam
        CMat beamformed_pilot(Link link, const ApState &tx, const ApState &rx, const ChannelRealization &ch,
                              std::span<const cplx> beam, std::size_t L, double sigma2, Rng &rng)
        {
            CMat X(beam.size(), L);
            for (std::size_t m = 0; m < beam.size(); ++m)
                for (std::size_t n = 0; n < L; ++n)
                    X(m, n) = beam[m];
            return over_the_air(link, tx, rx, ch, X, sigma2, rng);
        }

        CMat project(std::span<const cplx> f, const CMat &Y)
        {
            return CMat::row(matvec(Y, conj(f), Op::transpose));
        }
    }

    BeamGrid dft_beam_grid(std::size_t M)
    {
        if (M == 0)
            throw std::invalid_argument("dft_beam_grid: M must be >= 1");
        BeamGrid g{M, CMat(M, M)};
        const double s = 1.0 / std::sqrt(double(M));
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < M; ++k)
                g.beams(m, k) = std::polar(s, -2.0 * kPi * double((k * m) % M) / double(M));
        return g;
    }

    std::size_t fgb_select_beam(const CMat &Y, const BeamGrid &grid)
    {
        if (Y.rows() != grid.M)
            throw DimensionError("fgb_select_beam: " + Y.shape() + " block vs " + std::to_string(grid.M) + " beams");
        const CMat P = matmul(grid.beams, Y, Op::adjoint);
        std::size_t best = 0;
        double best_pow = -1.0;
        for (std::size_t k = 0; k < grid.M; ++k)
        {
            const double p = norm2(P.row_span(k));
            if (p > best_pow)
            {
                best_pow = p;
                best = k;
            }
        }
        return best;
    }

    std::pair<std::size_t, std::size_t> genie_beam_pair(const CMat &G_e, const BeamGrid &gridA, const BeamGrid &gridB)
    {
        const CMat P = matmul(matmul(gridA.beams, G_e, Op::adjoint), gridB.beams, Op::none, Op::conj);
        std::pair<std::size_t, std::size_t> best{0, 0};
        double best_pow = -1.0;
        for (std::size_t k = 0; k < P.rows(); ++k)
            for (std::size_t l = 0; l < P.cols(); ++l)
                if (std::norm(P(k, l)) > best_pow)
                {
                    best_pow = std::norm(P(k, l));
                    best = {k, l};
                }
        return best;
    }

    PhaseTrace run_fgb_phase_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch,
                                      const PhaseKnobs &knobs, Rng &rng)
    {
        PhaseTrace tr;
        tr.phi_true = pair_phase_offset(apA, apB).phi;

        const ApState A0 = apA, B0 = apB;
        const NoiseModel noise{knobs.sigma2};
        const SyncSignal x = make_sync_signal(knobs.N, rng);
        const StagePhases rot = phase_protocol_rotations(apA, apB, knobs, rng);
        const PilotMatrix pilot = make_pilot(knobs.L, A0.size());
        const BeamGrid gridA = dft_beam_grid(A0.size());
        const BeamGrid gridB = dft_beam_grid(B0.size());

        tr.Y_B1 = stage1_phase(A0, B0, ch, noise, pilot, rng, rot.stage1);

        std::size_t k = 0, l = 0;
        if (knobs.estimator == Estimator::pcsi)
        {
            std::tie(k, l) = genie_beam_pair(effective_channel(ch, A0.rx_gains(), B0.rx_gains()), gridA, gridB);
        }
        else
        {
            l = fgb_select_beam(tr.Y_B1, gridB);
            Rng aux = rng.derive(kReversePilotTag);
            k = fgb_select_beam(beamformed_pilot(Link::b_to_a, B0, A0, ch, conj(gridB.beam(l)), knobs.L, noise.sigma2, aux),
                                gridA);
        }
        const CVec f_k = gridA.beam(k);
        const CVec f_l = gridB.beam(l);
        tr.a = conj(f_l);

        tr.Y_A1 = project(f_k, stage2_phase(B0, A0, tr.a, x, ch, noise, rng, rot.stage2));

        const double energy = tr.Y_A1.frobenius_norm2();
        if (!(energy > 0.0))
            throw DegenerateEstimateError("run_fgb_phase_protocol: received block has zero energy");
        tr.c = double(knobs.N) / energy;
        CMat echo = tr.Y_A1.conj();
        echo *= std::sqrt(tr.c);
        const CMat X = matmul(CMat::column(conj(f_k)), echo);
        tr.Y_B2 = project(f_l, over_the_air(Link::a_to_b, A0, B0, ch, X, noise.sigma2, rng, rot.stage3));

        const CVec unit{cplx(1.0)};
        tr.phi_hat = simple_phase_estimate(unit, tr.Y_B2, x);
        tr.error = wrap_phase(tr.phi_hat - tr.phi_true);
        return tr;
    }

    FreqTrace run_fgb_freq_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch, const FreqKnobs &knobs,
                                    Rng &rng)
    {
        const double T = knobs.search.T;
        const FreqOffsetTruth truth = freq_offset_truth(apA, apB, T);
        const NoiseModel noise{knobs.sigma2};
        const CVec x_f = make_freq_sync_signal(knobs.N_f);
        const PilotMatrix pilot = make_pilot(knobs.L_B, apB.size());
        const BeamGrid gridA = dft_beam_grid(apA.size());
        const BeamGrid gridB = dft_beam_grid(apB.size());

        FreqTrace tr;
        tr.delta_true = truth.delta;
        tr.Y_A = stage1_freq(apB, apA, ch, noise, truth.delta, T, pilot, rng);

        std::size_t k = 0, l = 0;
        if (knobs.pcsi)
        {
            std::tie(k, l) = genie_beam_pair(effective_channel(ch, apA.rx_gains(), apB.rx_gains()), gridA, gridB);
        }
        else
        {
            k = fgb_select_beam(tr.Y_A, gridA);
            Rng aux = rng.derive(kReversePilotTag);
            l = fgb_select_beam(
                beamformed_pilot(Link::a_to_b, apA, apB, ch, conj(gridA.beam(k)), knobs.L_B, noise.sigma2, aux), gridB);
        }
        const CVec f_k = gridA.beam(k);
        const CVec f_l = gridB.beam(l);
        tr.a_f = conj(f_k);

        tr.Y_B = project(f_l, stage2_freq(apA, apB, tr.a_f, x_f, ch, noise, truth.delta, T, rng));

        FreqEstimate est = ml_freq_estimate(tr.Y_B, x_f, knobs.search);
        tr.delta_hat = est.delta_hat;
        tr.b_hat = std::move(est.b_hat);
        tr.boundary = est.boundary;

        const CMat b_full = over_the_air(Link::a_to_b, apA, apB, ch, CMat::column(tr.a_f), 0.0, rng);
        const CVec b_true{dotc(f_l, b_full.data())};
        tr.crb = crb_closed_form(b_true, x_f, knobs.sigma2);
        tr.error = (truth.delta - tr.delta_hat) * T;
        return tr;
    }
}
