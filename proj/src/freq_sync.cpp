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

#include "beamsync/freq_sync.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsync
{
    FreqOffsetTruth freq_offset_truth(const ApState &apA, const ApState &apB, double T)
    {
        FreqOffsetTruth f;
        f.delta = apA.lo().delta_f - apB.lo().delta_f;
        f.T = T;
        f.delta_norm = f.delta * T;
        if (!(std::abs(f.delta_norm) < 0.5))
            throw std::invalid_argument("freq_offset_truth: offset outside the unambiguous range");
        return f;
    }

    CVec make_freq_sync_signal(std::size_t N_f)
    {
        if (N_f < 2)
            throw std::invalid_argument("make_freq_sync_signal: N_f must be >= 2");
        CVec x(N_f);
        for (std::size_t n = 1; n <= N_f; ++n)
            x[n - 1] = std::sqrt(2.0) * std::cos(2.0 * kPi * double(n) / double(N_f) + kPi / 5.0);
        const double scale = std::sqrt(double(N_f) / norm2(x));
        for (auto &z : x)
            z *= scale;
        return x;
    }

    CVec rotation_vector(double delta, double T, std::size_t tau)
    {
        CVec d(tau);
        for (std::size_t k = 1; k <= tau; ++k)
            d[k - 1] = std::polar(1.0, 2.0 * kPi * double(k) * delta * T);
        return d;
    }

    namespace
    {
        std::vector<double> ramp(double delta, double T, std::size_t tau, double sign)
        {
            std::vector<double> p(tau);
            for (std::size_t k = 1; k <= tau; ++k)
                p[k - 1] = sign * 2.0 * kPi * double(k) * delta * T;
            return p;
        }
    }

    CMat stage1_freq(const ApState &apB, const ApState &apA, const ChannelRealization &ch, const NoiseModel &noise,
                     double delta, double T, const PilotMatrix &pilot_B, Rng &rng)
    {
        if (pilot_B.M != apB.size())
            throw DimensionError("stage1_freq: pilot built for " + std::to_string(pilot_B.M) + " antennas, AP B has " +
                                 std::to_string(apB.size()));
        CMat X = pilot_B.Phi.transpose();
        X *= std::sqrt(double(pilot_B.L)); // unit power per pilot symbol
        return over_the_air(Link::b_to_a, apB, apA, ch, X, noise.sigma2, rng, ramp(delta, T, pilot_B.L, 1.0));
    }

    CVec estimate_beam_direction_freq(const CMat &Y_A)
    {
        return conj(dominant_left_singular_vector(Y_A).u);
    }

    CMat stage2_freq(const ApState &apA, const ApState &apB, std::span<const cplx> a_f, std::span<const cplx> x_f,
                     const ChannelRealization &ch, const NoiseModel &noise, double delta, double T, Rng &rng)
    {
        if (a_f.size() != apA.size())
            throw DimensionError("stage2_freq: beam length " + std::to_string(a_f.size()) + " vs " +
                                 std::to_string(apA.size()) + " antennas");
        const CMat X = matmul(CMat::column(a_f), CMat::row(x_f));
        return over_the_air(Link::a_to_b, apA, apB, ch, X, noise.sigma2, rng, ramp(delta, T, x_f.size(), -1.0));
    }

    namespace
    {
        CVec derotated_projection(const CMat &Y_B, std::span<const cplx> x_f, double delta, double T)
        {
            CVec w = rotation_vector(delta, T, x_f.size());
            for (std::size_t n = 0; n < w.size(); ++n)
                w[n] *= x_f[n];
            return matvec(Y_B, w);
        }
    }

    double freq_objective(const CMat &Y_B, std::span<const cplx> x_f, double delta, double T)
    {
        return norm2(derotated_projection(Y_B, x_f, delta, T));
    }

    FreqEstimate ml_freq_estimate(const CMat &Y_B, std::span<const cplx> x_f, const FreqSearch &search)
    {
        if (search.grid < 2 || !(search.hi_hz > search.lo_hz))
            throw std::invalid_argument("ml_freq_estimate: empty search grid");
        if (!(search.tol_hz > 0.0))
            throw std::invalid_argument("ml_freq_estimate: refinement tolerance must be positive");
        if (Y_B.cols() != x_f.size())
            throw DimensionError("ml_freq_estimate: " + Y_B.shape() + " received block vs signal length " +
                                 std::to_string(x_f.size()));

        const double T = search.T;
        const double step = (search.hi_hz - search.lo_hz) / double(search.grid - 1);
        auto f = [&](double d) { return freq_objective(Y_B, x_f, d, T); };

        std::size_t best = 0;
        double best_val = -1.0;
        for (std::size_t k = 0; k < search.grid; ++k)
        {
            const double v = f(search.lo_hz + double(k) * step);
            if (v > best_val)
            {
                best_val = v;
                best = k;
            }
        }

        FreqEstimate out;
        out.boundary = best == 0 || best == search.grid - 1;

        // Golden-section refinement over the neighbouring cells
        constexpr double invphi = 0.6180339887498949;
        double a = search.lo_hz + double(best == 0 ? 0 : best - 1) * step;
        double b = search.lo_hz + double(std::min(best + 1, search.grid - 1)) * step;
        double c = b - invphi * (b - a);
        double d = a + invphi * (b - a);
        double fc = f(c), fd = f(d);
        while (b - a > search.tol_hz)
        {
            if (fc > fd)
            {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = f(c);
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = f(d);
            }
        }
        double delta_hat = 0.5 * (a + b);
        if (f(delta_hat) < best_val)
            delta_hat = search.lo_hz + double(best) * step;

        out.delta_hat = delta_hat;
        out.b_hat = derotated_projection(Y_B, x_f, delta_hat, T);
        const double ex = norm2(x_f);
        for (auto &z : out.b_hat)
            z /= ex;
        return out;
    }

    double crb_denominator(std::span<const cplx> x_f)
    {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < x_f.size(); ++i)
        {
            const double n = double(i + 1);
            const double x2 = std::norm(x_f[i]);
            s0 += x2;
            s1 += n * x2;
            s2 += n * n * x2;
        }
        if (!(s0 > 0.0))
            throw std::invalid_argument("crb_denominator: zero signal");
        return s2 - s1 * s1 / s0;
    }

    double crb_closed_form(std::span<const cplx> b, std::span<const cplx> x_f, double sigma2)
    {
        const double nb = norm2(b);
        const double den = crb_denominator(x_f);
        if (!(nb > 0.0) || !(den > 0.0))
            throw std::domain_error("crb_closed_form: degenerate Fisher information");
        return sigma2 / (8.0 * kPi * kPi * nb * den);
    }

    FimResult fim_and_crb(std::span<const cplx> b, std::span<const cplx> x_f, double sigma2)
    {
        if (!(sigma2 > 0.0))
            throw std::invalid_argument("fim_and_crb: sigma2 must be positive");
        const std::size_t M = b.size();
        FimResult out;
        out.dim = 2 * M + 1;
        out.J.assign(out.dim * out.dim, 0.0);
        auto J = [&](std::size_t i, std::size_t j) -> double & { return out.J[i * out.dim + j]; };
        const std::size_t last = 2 * M;
        const double nb = norm2(b);

        for (std::size_t i = 0; i < x_f.size(); ++i)
        {
            const double n = double(i + 1);
            const double w = 2.0 * std::norm(x_f[i]) / sigma2;
            for (std::size_t m = 0; m < M; ++m)
            {
                J(m, m) += w;
                J(M + m, M + m) += w;
                const double cr = w * 2.0 * kPi * n * b[m].imag();
                const double ci = -w * 2.0 * kPi * n * b[m].real();
                J(m, last) += cr;
                J(last, m) += cr;
                J(M + m, last) += ci;
                J(last, M + m) += ci;
            }
            J(last, last) += w * 4.0 * kPi * kPi * n * n * nb;
        }
        out.crb = crb_closed_form(b, x_f, sigma2);
        return out;
    }

    FreqTrace run_freq_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch, const FreqKnobs &knobs,
                                Rng &rng)
    {
        const double T = knobs.search.T;
        const FreqOffsetTruth truth = freq_offset_truth(apA, apB, T);
        const NoiseModel noise{knobs.sigma2};
        const CVec x_f = make_freq_sync_signal(knobs.N_f);
        const PilotMatrix pilot = make_pilot(knobs.L_B, apB.size());

        FreqTrace tr;
        tr.delta_true = truth.delta;
        tr.Y_A = stage1_freq(apB, apA, ch, noise, truth.delta, T, pilot, rng);
        if (knobs.pcsi)
            tr.a_f = conj(dominant_left_singular_vector(effective_channel(ch, apA.rx_gains(), apB.rx_gains())).u);
        else
            tr.a_f = estimate_beam_direction_freq(tr.Y_A);
        tr.Y_B = stage2_freq(apA, apB, tr.a_f, x_f, ch, noise, truth.delta, T, rng);

        FreqEstimate est = ml_freq_estimate(tr.Y_B, x_f, knobs.search);
        tr.delta_hat = est.delta_hat;
        tr.b_hat = std::move(est.b_hat);
        tr.boundary = est.boundary;

        const CMat b_true = over_the_air(Link::a_to_b, apA, apB, ch, CMat::column(tr.a_f), 0.0, rng);
        tr.crb = crb_closed_form(b_true.data(), x_f, knobs.sigma2);
        tr.error = (truth.delta - tr.delta_hat) * T;
        return tr;
    }
}
