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

#include "beamsync/phase_sync.hpp"

#include <cmath>

namespace beamsync
{
    CMat over_the_air(Link link, const ApState &tx, const ApState &rx, const ChannelRealization &ch, const CMat &X,
                      double sigma2, Rng &rng, std::span<const double> column_phase)
    {
        const CVec e = tx.tx_gains();
        const CVec r = rx.rx_gains();
        const CMat sent = scale_rows(e, X);
        CMat Y = link == Link::a_to_b ? matmul(ch.G, sent, Op::transpose) : matmul(ch.G, sent);
        if (Y.rows() != r.size())
            throw DimensionError("over_the_air: receiver has " + std::to_string(r.size()) +
                                 " antennas, channel delivers " + Y.shape());
        Y = scale_rows(r, Y);
        if (!column_phase.empty())
        {
            if (column_phase.size() != Y.cols())
                throw DimensionError("over_the_air: rotation length does not match " + Y.shape());
            CVec rot(column_phase.size());
            for (std::size_t k = 0; k < rot.size(); ++k)
                rot[k] = std::polar(1.0, column_phase[k]);
            Y = scale_cols(Y, rot);
        }
        add_awgn(Y, sigma2, rng);
        return Y;
    }

    PilotMatrix make_pilot(std::size_t L, std::size_t M)
    {
        if (M == 0 || L < M)
            throw std::invalid_argument("make_pilot: need L >= M >= 1, got L=" + std::to_string(L) +
                                        " M=" + std::to_string(M));
        PilotMatrix p{L, M, CMat(L, M)};
        const double s = 1.0 / std::sqrt(double(L));
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t m = 0; m < M; ++m)
                p.Phi(l, m) = std::polar(s, -2.0 * kPi * double((l * m) % L) / double(L));
        return p;
    }

    SyncSignal make_sync_signal(std::size_t N, Rng &rng)
    {
        if (N == 0)
            throw std::invalid_argument("make_sync_signal: N must be >= 1");
        SyncSignal s{CVec(N)};
        for (auto &z : s.x)
            z = rng.complex_normal();
        const double scale = std::sqrt(double(N) / norm2(s.x));
        for (auto &z : s.x)
            z *= scale;
        return s;
    }

    CMat stage1_phase(const ApState &apA, const ApState &apB, const ChannelRealization &ch, const NoiseModel &noise,
                      const PilotMatrix &pilot, Rng &rng, std::span<const double> column_phase)
    {
        if (pilot.M != apA.size())
            throw DimensionError("stage1_phase: pilot built for " + std::to_string(pilot.M) + " antennas, AP A has " +
                                 std::to_string(apA.size()));
        CMat X = pilot.Phi.transpose();
        X *= std::sqrt(double(pilot.L)); // unit power per pilot symbol
        return over_the_air(Link::a_to_b, apA, apB, ch, X, noise.sigma2, rng, column_phase);
    }

    CVec estimate_beam_direction(const CMat &Y_B1)
    {
        return conj(dominant_left_singular_vector(Y_B1).u);
    }

    CMat stage2_phase(const ApState &apB, const ApState &apA, std::span<const cplx> a, const SyncSignal &x,
                      const ChannelRealization &ch, const NoiseModel &noise, Rng &rng,
                      std::span<const double> column_phase)
    {
        if (a.size() != apB.size())
            throw DimensionError("stage2_phase: beam length " + std::to_string(a.size()) + " vs " +
                                 std::to_string(apB.size()) + " antennas");
        const CMat X = matmul(CMat::column(a), CMat::row(x.x));
        return over_the_air(Link::b_to_a, apB, apA, ch, X, noise.sigma2, rng, column_phase);
    }

    Stage3Result stage3_phase(const ApState &apA, const ApState &apB, const CMat &Y_A1, const ChannelRealization &ch,
                              const NoiseModel &noise, Rng &rng, std::span<const double> column_phase)
    {
        const double energy = Y_A1.frobenius_norm2();
        if (!(energy > 0.0))
            throw DegenerateEstimateError("stage3_phase: received block has zero energy");
        Stage3Result out;
        out.c = double(Y_A1.cols()) / energy;
        CMat X = Y_A1.conj();
        X *= std::sqrt(out.c);
        out.Y_B2 = over_the_air(Link::a_to_b, apA, apB, ch, X, noise.sigma2, rng, column_phase);
        return out;
    }

    double simple_phase_estimate(std::span<const cplx> a, const CMat &Y_B2, const SyncSignal &x)
    {
        const cplx stat = dotu(a, matvec(Y_B2, x.x));
        if (std::abs(stat) < 1e-14)
            throw DegenerateEstimateError("simple_phase_estimate: statistic vanished");
        return wrap_phase(std::arg(stat));
    }

    double nls_phase_estimate(const CMat &Y_B2, std::span<const cplx> a, const SyncSignal &x, const CMat &G_e, double c2)
    {
        const CMat K = matmul(G_e, G_e, Op::transpose, Op::conj);
        CMat R = K;
        R *= c2 * c2;
        R += CMat::identity(K.rows());
        const CMat y = hpd_solve(R, CMat::column(matvec(Y_B2, x.x)));
        const cplx stat = dotu(a, matvec(K, y.data()));
        if (std::abs(stat) < 1e-14)
            throw DegenerateEstimateError("nls_phase_estimate: statistic vanished");
        return wrap_phase(std::arg(stat));
    }

    double nls_noise_scale(double c, const ApState &apA)
    {
        return std::sqrt(c) * std::abs(apA.tx_gains()[0]) / std::abs(apA.chains()[0].r());
    }

    double whitened_beam_gain(const CMat &G_e, double c2, std::span<const cplx> a)
    {
        const CMat K = matmul(G_e, G_e, Op::transpose, Op::conj);
        CMat R = K;
        R *= c2 * c2;
        R += CMat::identity(K.rows());
        const CVec w = matvec(K, conj(a));
        const CMat y = hpd_solve(R, CMat::column(w));
        return dotc(w, y.data()).real();
    }

    CVec dominant_right_vector(const CMat &G_e)
    {
        return dominant_left_singular_vector(G_e.adjoint()).u;
    }

    StagePhases phase_protocol_rotations(ApState &apA, ApState &apB, const PhaseKnobs &knobs, Rng &rng)
    {
        const std::size_t L = knobs.L, N = knobs.N;
        const bool noisy_lo = knobs.phase_noise && (apA.lo().sigma_nu2 > 0.0 || apB.lo().sigma_nu2 > 0.0);
        if (!noisy_lo && knobs.residual_delta_hz == 0.0)
            return {};

        std::vector<double> omega(L + 2 * N, 0.0);
        if (noisy_lo)
        {
            const auto pa = wiener_phase_noise_path(apA.lo(), L + 2 * N, rng);
            const auto pb = wiener_phase_noise_path(apB.lo(), L + 2 * N, rng);
            for (std::size_t k = 0; k < omega.size(); ++k)
                omega[k] = (pa[k] - pa[0]) + (pb[k] - pb[0]);
        }

        // Stage II/III carry the conjugate rotation so the round trip cancels common phase
        const double cfo = 2.0 * kPi * knobs.residual_delta_hz * knobs.T;
        StagePhases s{std::vector<double>(L), std::vector<double>(N), std::vector<double>(N)};
        for (std::size_t l = 0; l < L; ++l)
            s.stage1[l] = omega[l];
        for (std::size_t n = 0; n < N; ++n)
        {
            s.stage2[n] = -(omega[L + n] + cfo * double(n + 1));
            s.stage3[n] = -(omega[L + N + n] + cfo * double(N + n + 1));
        }
        return s;
    }

    PhaseTrace run_phase_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch, const PhaseKnobs &knobs,
                                  Rng &rng)
    {
        PhaseTrace tr;
        tr.phi_true = pair_phase_offset(apA, apB).phi;

        const ApState A0 = apA, B0 = apB;
        const NoiseModel noise{knobs.sigma2};
        const SyncSignal x = make_sync_signal(knobs.N, rng);
        const StagePhases rot = phase_protocol_rotations(apA, apB, knobs, rng);
        const PilotMatrix pilot = make_pilot(knobs.L, A0.size());

        tr.Y_B1 = stage1_phase(A0, B0, ch, noise, pilot, rng, rot.stage1);

        CMat G_e;
        if (knobs.estimator != Estimator::simple)
            G_e = effective_channel(ch, A0.rx_gains(), B0.rx_gains());
        tr.a = knobs.estimator == Estimator::pcsi ? dominant_right_vector(G_e) : estimate_beam_direction(tr.Y_B1);

        tr.Y_A1 = stage2_phase(B0, A0, tr.a, x, ch, noise, rng, rot.stage2);
        auto s3 = stage3_phase(A0, B0, tr.Y_A1, ch, noise, rng, rot.stage3);
        tr.Y_B2 = std::move(s3.Y_B2);
        tr.c = s3.c;

        tr.phi_hat = knobs.estimator == Estimator::simple
                         ? simple_phase_estimate(tr.a, tr.Y_B2, x)
                         : nls_phase_estimate(tr.Y_B2, tr.a, x, G_e, nls_noise_scale(tr.c, A0));
        tr.error = wrap_phase(tr.phi_hat - tr.phi_true);
        return tr;
    }
}
