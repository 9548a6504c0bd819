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

#include <catch2/catch_amalgamated.hpp>

#include "beamsync/freq_sync.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace beamsync;

namespace
{
    ApState random_ap(std::size_t M, Rng &rng, double delta_f = 0.0)
    {
        LoModel lo;
        lo.delta_f = delta_f;
        return ApState(draw_rf_chain_gains(M, rng), lo);
    }

    cplx kappa(const ApState &ap) { return ap.tx_gains()[0] / ap.chains()[0].r(); }

    double max_abs_diff(const CMat &X, const CMat &Y)
    {
        REQUIRE(X.rows() == Y.rows());
        REQUIRE(X.cols() == Y.cols());
        double d = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i)
            d = std::max(d, std::abs(X.data()[i] - Y.data()[i]));
        return d;
    }

    // b = kappa_A G_e^T a_f
    CVec true_b(const ApState &A, const ApState &B, const ChannelRealization &ch, std::span<const cplx> a_f)
    {
        CVec b = matvec(effective_channel(ch, A.rx_gains(), B.rx_gains()), a_f, Op::transpose);
        for (auto &v : b)
            v *= kappa(A);
        return b;
    }

    CVec random_vec(std::size_t n, Rng &rng)
    {
        CVec v(n);
        for (auto &z : v)
            z = rng.complex_normal();
        return v;
    }

    const double T = kSymbolTimeS;
}

TEST_CASE("freq_offset_truth - normalized offset and range")
{
    Rng rng(1);
    const ApState A = random_ap(2, rng, 120.0), B = random_ap(2, rng, -30.0);
    const auto t = freq_offset_truth(A, B, T);
    CHECK(t.delta == 150.0);
    CHECK(std::abs(t.delta_norm - 150.0 * T) < 1e-18);
    const ApState far = random_ap(2, rng, 7000.0);
    CHECK_THROWS_AS(freq_offset_truth(far, B, T), std::invalid_argument);
}

TEST_CASE("make_freq_sync_signal - real, normalized, identifiable")
{
    const CVec x2 = make_freq_sync_signal(2);
    CHECK(x2.size() == 2);
    CHECK(std::abs(norm2(x2) - 2.0) < 1e-12);
    for (std::size_t n = 2; n <= 64; ++n)
    {
        const CVec x = make_freq_sync_signal(n);
        CHECK(std::abs(norm2(x) - double(n)) < 1e-12 * double(n));
        for (std::size_t k = 0; k < n; ++k)
        {
            CHECK(x[k].imag() == 0.0);
            // 2 pi k / n + pi / 5 hits pi / 2 only when 20 divides n
            if (n % 20 != 0)
                CHECK(std::abs(x[k].real()) > 1e-6);
        }
        CHECK(crb_denominator(x) > 0.0);
    }
    CHECK_THROWS_AS(make_freq_sync_signal(1), std::invalid_argument);
}

TEST_CASE("rotation_vector - unit entries with phases 2 pi k delta T")
{
    const CVec r = rotation_vector(250.0, T, 12);
    REQUIRE(r.size() == 12);
    for (std::size_t k = 0; k < r.size(); ++k)
    {
        CHECK(std::abs(std::abs(r[k]) - 1.0) < 1e-15);
        CHECK(std::abs(wrap_phase(std::arg(r[k]) - 2.0 * kPi * double(k + 1) * 250.0 * T)) < 1e-12);
    }
}

TEST_CASE("stage1_freq - scalar case and rotation peel")
{
    Rng rng(2);
    {
        const ApState A(std::vector<RfChain>{RfChain(1.0, 1.0)}), B(std::vector<RfChain>{RfChain(1.0, 1.0)});
        const CMat Y = stage1_freq(B, A, ChannelRealization{CMat{{1.0}}}, NoiseModel{0.0}, 0.0, T, make_pilot(1, 1),
                                   rng);
        CHECK(std::abs(Y(0, 0) - cplx(1.0)) < 1e-15);
    }
    for (int trial = 0; trial < 20; ++trial)
    {
        const ApState A = random_ap(4, rng), B = random_ap(3, rng);
        const auto ch = draw_rayleigh(4, 3, rng);
        const auto pilot = make_pilot(6, 3);
        const double delta = rng.uniform(-300.0, 300.0);
        CMat Y = stage1_freq(B, A, ch, NoiseModel{0.0}, delta, T, pilot, rng);
        const CMat Y0 = stage1_freq(B, A, ch, NoiseModel{0.0}, 0.0, T, pilot, rng);
        const CVec rot = rotation_vector(delta, T, 6);
        for (std::size_t i = 0; i < Y.rows(); ++i)
            for (std::size_t k = 0; k < Y.cols(); ++k)
                Y(i, k) *= std::conj(rot[k]);
        CHECK(max_abs_diff(Y, Y0) < 1e-12);
    }
}

TEST_CASE("stage1_freq and stage2_freq - noise power matches sigma2")
{
    Rng rng(3);
    const double sigma2 = 0.7;
    double acc1 = 0.0, acc2 = 0.0;
    const int trials = 1000;
    const CVec x = make_freq_sync_signal(8);
    for (int t = 0; t < trials; ++t)
    {
        const ApState A = random_ap(4, rng), B = random_ap(4, rng);
        const auto ch = draw_rayleigh(4, 4, rng);
        const double delta = rng.uniform(-300.0, 300.0);
        const CVec a = oracle::random_unit(4, rng);
        Rng r1 = rng.derive(t), r2 = rng.derive(t);
        acc1 += (stage1_freq(B, A, ch, NoiseModel{sigma2}, delta, T, make_pilot(8, 4), r1) -
                 stage1_freq(B, A, ch, NoiseModel{0.0}, delta, T, make_pilot(8, 4), r2))
                    .frobenius_norm2() /
                32.0;
        acc2 += (stage2_freq(A, B, a, x, ch, NoiseModel{sigma2}, delta, T, r1) -
                 stage2_freq(A, B, a, x, ch, NoiseModel{0.0}, delta, T, r2))
                    .frobenius_norm2() /
                32.0;
    }
    CHECK(std::abs(acc1 / trials / sigma2 - 1.0) < 0.03);
    CHECK(std::abs(acc2 / trials / sigma2 - 1.0) < 0.03);
}

TEST_CASE("estimate_beam_direction_freq - aligns with the dominant left direction of the channel")
{
    Rng rng(4);
    {
        const CVec u = oracle::random_unit(5, rng), v = oracle::random_unit(3, rng);
        const CVec a = estimate_beam_direction_freq(oracle::naive_matmul(CMat::column(u), CMat::row(conj(v))));
        CHECK(std::abs(std::abs(dotc(a, conj(u))) - 1.0) < 1e-10);
    }
    for (double delta : {0.0, 180.0, -290.0})
        for (int trial = 0; trial < 20; ++trial)
        {
            const ApState A = random_ap(5, rng), B = random_ap(4, rng);
            const auto ch = draw_rayleigh(5, 4, rng);
            const CMat Y = stage1_freq(B, A, ch, NoiseModel{0.0}, delta, T, make_pilot(4, 4), rng);
            const CVec a_f = estimate_beam_direction_freq(Y);
            const auto u1 = oracle::dominant_left(effective_channel(ch, A.rx_gains(), B.rx_gains()));
            CHECK(std::abs(dotc(a_f, conj(u1.u))) > 1.0 - 1e-8);
        }
}

TEST_CASE("stage2_freq - rank-one structure and objective peak at the truth")
{
    Rng rng(5);
    const CVec x = make_freq_sync_signal(10);
    for (int trial = 0; trial < 20; ++trial)
    {
        const ApState A = random_ap(4, rng), B = random_ap(5, rng);
        const auto ch = draw_rayleigh(4, 5, rng);
        const CVec a = oracle::random_unit(4, rng);
        const CVec b = true_b(A, B, ch, a);
        const CMat Y0 = stage2_freq(A, B, a, x, ch, NoiseModel{0.0}, 0.0, T, rng);
        CHECK(max_abs_diff(Y0, oracle::naive_matmul(CMat::column(b), CMat::row(x))) < 1e-12);

        const double delta = rng.uniform(-250.0, 250.0);
        const CMat Y = stage2_freq(A, B, a, x, ch, NoiseModel{0.0}, delta, T, rng);
        const double peak = freq_objective(Y, x, delta, T);
        for (double off = -300.0; off <= 300.0; off += 0.5)
            if (std::abs(off) > 1e-9)
                CHECK(freq_objective(Y, x, delta + off, T) < peak);
    }
}

TEST_CASE("ml_freq_estimate - noiseless exactness and nuisance closed form")
{
    Rng rng(6);
    const CVec x = make_freq_sync_signal(10);
    for (int trial = 0; trial < 50; ++trial)
    {
        const ApState A = random_ap(4, rng), B = random_ap(4, rng);
        const auto ch = draw_rayleigh(4, 4, rng);
        const CVec a = oracle::random_unit(4, rng);
        const double delta = rng.uniform(-299.0, 299.0);
        const CMat Y = stage2_freq(A, B, a, x, ch, NoiseModel{0.0}, delta, T, rng);
        const auto est = ml_freq_estimate(Y, x, FreqSearch{});
        CHECK(std::abs(est.delta_hat - delta) < 1e-3);
        const CVec b = true_b(A, B, ch, a);
        // least squares at the exact offset
        const CVec rot = rotation_vector(delta, T, x.size());
        CVec bx(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            for (std::size_t n = 0; n < x.size(); ++n)
                bx[i] += Y(i, n) * rot[n] * x[n];
            bx[i] /= norm2(x);
        }
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            CHECK(std::abs(bx[i] - b[i]) < 1e-8);
            CHECK(std::abs(est.b_hat[i] - b[i]) < 1e-6 * norm(b));
        }
    }
}

TEST_CASE("ml_freq_estimate - boundary flag and argument errors")
{
    Rng rng(7);
    const CVec x = make_freq_sync_signal(10);
    const ApState A = random_ap(3, rng), B = random_ap(3, rng);
    const auto ch = draw_rayleigh(3, 3, rng);
    const CVec a = oracle::random_unit(3, rng);
    const CMat Y = stage2_freq(A, B, a, x, ch, NoiseModel{0.0}, 1000.0, T, rng);
    const auto est = ml_freq_estimate(Y, x, FreqSearch{});
    CHECK(est.boundary);
    CHECK(std::abs(est.delta_hat - 300.0) < 300.0 * 2.0 / 511.0);
    const CMat Yin = stage2_freq(A, B, a, x, ch, NoiseModel{0.0}, 10.0, T, rng);
    CHECK_FALSE(ml_freq_estimate(Yin, x, FreqSearch{}).boundary);

    FreqSearch empty;
    empty.grid = 0;
    CHECK_THROWS_AS(ml_freq_estimate(Y, x, empty), std::invalid_argument);
    FreqSearch inverted;
    inverted.lo_hz = 10.0;
    inverted.hi_hz = -10.0;
    CHECK_THROWS_AS(ml_freq_estimate(Y, x, inverted), std::invalid_argument);
}

TEST_CASE("ml_freq_estimate - refined peak stays within one coarse cell at high SNR")
{
    Rng rng(8);
    const CVec x = make_freq_sync_signal(10);
    const FreqSearch search;
    const double step = (search.hi_hz - search.lo_hz) / double(search.grid - 1);
    const int trials = 500;
    int inside = 0;
    for (int t = 0; t < trials; ++t)
    {
        const ApState A = random_ap(8, rng), B = random_ap(8, rng);
        const auto ch = draw_rayleigh(8, 8, rng);
        const CVec a = oracle::random_unit(8, rng);
        const CMat Y = stage2_freq(A, B, a, x, ch, snr_to_sigma2(10.0), rng.uniform(-300.0, 300.0), T, rng);
        double best = search.lo_hz, best_val = -1.0;
        for (std::size_t k = 0; k < search.grid; ++k)
        {
            const double d = search.lo_hz + double(k) * step;
            const double v = freq_objective(Y, x, d, T);
            if (v > best_val)
            {
                best_val = v;
                best = d;
            }
        }
        if (std::abs(ml_freq_estimate(Y, x, search).delta_hat - best) <= step)
            ++inside;
    }
    CHECK(inside >= trials * 99 / 100);
}

TEST_CASE("ml_freq_estimate - equivariant to an extra common rotation")
{
    Rng rng(9);
    const CVec x = make_freq_sync_signal(10);
    for (int trial = 0; trial < 30; ++trial)
    {
        const ApState A = random_ap(4, rng), B = random_ap(4, rng);
        const auto ch = draw_rayleigh(4, 4, rng);
        const CVec a = oracle::random_unit(4, rng);
        const CMat Y = stage2_freq(A, B, a, x, ch, NoiseModel{0.05}, rng.uniform(-200.0, 200.0), T, rng);
        const double d0 = rng.uniform(-50.0, 50.0);
        CMat Ys = Y;
        const CVec rot = rotation_vector(d0, T, x.size());
        for (std::size_t i = 0; i < Ys.rows(); ++i)
            for (std::size_t n = 0; n < Ys.cols(); ++n)
                Ys(i, n) *= std::conj(rot[n]);
        const double e0 = ml_freq_estimate(Y, x, FreqSearch{}).delta_hat;
        const double e1 = ml_freq_estimate(Ys, x, FreqSearch{}).delta_hat;
        CHECK(std::abs(e1 - e0 - d0) < 1e-3);
    }
}

TEST_CASE("fim_and_crb - block inverse corner equals the closed form")
{
    Rng rng(10);
    for (int inst = 0; inst < 100; ++inst)
    {
        const std::size_t M = 1 + std::size_t(rng.uniform(0.0, 6.0));
        const CVec b = random_vec(M, rng);
        const CVec x = make_freq_sync_signal(2 + std::size_t(rng.uniform(0.0, 20.0)));
        const double sigma2 = rng.uniform(0.01, 3.0);
        const auto fim = fim_and_crb(b, x, sigma2);
        REQUIRE(fim.dim == 2 * M + 1);
        const auto inv = oracle::gauss_jordan_inverse(fim.J, fim.dim);
        const double corner = inv[fim.dim * fim.dim - 1];
        const double closed = crb_closed_form(b, x, sigma2);
        CHECK(std::abs(corner - closed) < 1e-8 * closed);
        CHECK(std::abs(fim.crb - closed) < 1e-12 * closed);
    }
}

TEST_CASE("crb_closed_form - scaling and monotonicity in N_f")
{
    Rng rng(11);
    const CVec b = random_vec(4, rng);
    const CVec x = make_freq_sync_signal(10);
    const double base = crb_closed_form(b, x, 1.0);
    CVec b2 = b;
    for (auto &v : b2)
        v *= 2.0;
    CHECK(std::abs(crb_closed_form(b2, x, 1.0) - base / 4.0) < 1e-12 * base);
    CHECK(std::abs(crb_closed_form(b, x, 0.5) - base / 2.0) < 1e-12 * base);
    for (std::size_t k = 2; k <= 32; ++k)
        CHECK(crb_closed_form(b, make_freq_sync_signal(2 * k), 1.0) < crb_closed_form(b, make_freq_sync_signal(k), 1.0));
    CHECK_THROWS(crb_closed_form(CVec(3), x, 1.0));
}

TEST_CASE("dominant direction maximizes the beamformed channel energy")
{
    Rng rng(12);
    for (int inst = 0; inst < 20; ++inst)
    {
        const CMat G_e = oracle::random_matrix(6, 5, rng);
        const CVec a_opt = conj(dominant_left_singular_vector(G_e).u);
        const double best = norm2(matvec(G_e, a_opt, Op::transpose));
        for (int i = 0; i < 100; ++i)
            CHECK(norm2(matvec(G_e, oracle::random_unit(6, rng), Op::transpose)) <= best * (1.0 + 1e-12));
    }
}

TEST_CASE("run_freq_protocol - noiseless exactness and trace invariants")
{
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial)
    {
        ApState A = random_ap(6, rng, rng.uniform(-150.0, 150.0)), B = random_ap(6, rng, rng.uniform(-150.0, 150.0));
        const auto ch = draw_rayleigh(6, 6, rng);
        FreqKnobs k;
        k.L_B = 6;
        k.sigma2 = 0.0;
        const auto tr = run_freq_protocol(A, B, ch, k, rng);
        CHECK(std::abs(tr.error) < 1e-3 * T);
        CHECK(std::abs(norm(tr.a_f) - 1.0) < 1e-10);
        CHECK(tr.error == (tr.delta_true - tr.delta_hat) * T);
    }
    for (int trial = 0; trial < 20; ++trial)
    {
        ApState A = random_ap(4, rng, 100.0), B = random_ap(4, rng);
        const auto ch = draw_rayleigh(4, 4, rng);
        FreqKnobs k;
        k.L_B = 4;
        k.sigma2 = 0.1;
        const auto tr = run_freq_protocol(A, B, ch, k, rng);
        CHECK(tr.crb > 0.0);
        CHECK(tr.error == (tr.delta_true - tr.delta_hat) * T);
    }
}
