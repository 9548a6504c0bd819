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

#include "beamsync/hardware.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace beamsync;

TEST_CASE("wrap_phase - range is (-pi, pi]")
{
    CHECK(wrap_phase(kPi) == kPi);
    CHECK(wrap_phase(-kPi) == kPi);
    CHECK(std::abs(wrap_phase(3.0 * kPi) - kPi) < 1e-12);
    CHECK(std::abs(wrap_phase(0.5 + 4.0 * kPi) - 0.5) < 1e-12);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
    {
        const double w = wrap_phase(rng.uniform(-50.0, 50.0));
        CHECK(w > -kPi);
        CHECK(w <= kPi);
    }
}

TEST_CASE("RfChain - zero gains rejected")
{
    CHECK_THROWS_AS(RfChain(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RfChain(1.0, 0.0), std::invalid_argument);
    CHECK_NOTHROW(RfChain(1e-9, cplx(0.0, 1e-9)));
}

TEST_CASE("draw_rf_chain_gains - reproducible under a fixed seed")
{
    Rng a(77), b(77);
    const auto ca = draw_rf_chain_gains(1, a);
    const auto cb = draw_rf_chain_gains(1, b);
    CHECK(ca[0].t() == cb[0].t());
    CHECK(ca[0].r() == cb[0].r());
    CHECK_THROWS_AS(draw_rf_chain_gains(0, a), std::invalid_argument);
}

TEST_CASE("draw_rf_chain_gains - CN(0,1) moments")
{
    Rng rng(2);
    const std::size_t n = 10000;
    const auto chains = draw_rf_chain_gains(n, rng);
    cplx mean = 0.0;
    double var_re = 0.0;
    for (const auto &c : chains)
        mean += c.t();
    mean /= double(n);
    for (const auto &c : chains)
        var_re += std::pow(c.t().real() - mean.real(), 2);
    var_re /= double(n - 1);
    const double se = std::sqrt(0.5 / double(n));
    CHECK(std::abs(mean.real()) < 3.0 * se);
    CHECK(std::abs(mean.imag()) < 3.0 * se);
    CHECK(std::abs(var_re - 0.5) < 0.025);
}

TEST_CASE("draw_rf_chain_gains - pair offsets pass a 16-bin chi-square test")
{
    Rng rng(3);
    const auto chains = draw_rf_chain_gains(10000, rng);
    std::vector<double> offsets;
    for (const auto &c : chains)
        offsets.push_back(wrap_phase(std::arg(c.t()) - std::arg(c.r())));
    CHECK(oracle::chi_square_uniform(offsets, -kPi, kPi, 16) < oracle::kChi2_15_p01);
}

TEST_CASE("internal_calibration - direct cases")
{
    const std::vector<RfChain> same(4, RfChain(cplx(0.3, 0.4), cplx(-1.0, 2.0)));
    for (const auto &c : internal_calibration(same))
        CHECK(std::abs(c - cplx(1.0)) < 1e-15);

    const std::vector<RfChain> two{RfChain(1.0, 1.0), RfChain(2.0, 1.0)};
    const auto c = internal_calibration(two);
    CHECK(c[0] == cplx(1.0));
    CHECK(std::abs(c[1] - cplx(0.5)) < 1e-15);
}

TEST_CASE("internal_calibration - equalizes the effective t/r ratio")
{
    Rng rng(4);
    const ApState ap(draw_rf_chain_gains(8, rng));
    CHECK(ap.calib()[0] == cplx(1.0));
    const cplx ref = ap.chains()[0].t() / ap.chains()[0].r();
    for (std::size_t m = 0; m < ap.size(); ++m)
    {
        const cplx ratio = ap.chains()[m].t() * ap.calib()[m] / ap.chains()[m].r();
        CHECK(std::abs(ratio - ref) < 1e-12 * std::abs(ref));
    }
}

TEST_CASE("pair_phase_offset - direct cases")
{
    const ApState unit(std::vector<RfChain>{RfChain(1.0, 1.0)});
    CHECK(pair_phase_offset(unit, unit).phi == 0.0);

    const ApState a(std::vector<RfChain>{RfChain(std::polar(1.0, kPi / 2), 1.0)});
    CHECK(std::abs(pair_phase_offset(a, unit).phi - kPi / 2) < 1e-15);
}

TEST_CASE("pair_phase_offset - recomputation oracle and common-rotation invariance")
{
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep)
    {
        const ApState A(draw_rf_chain_gains(3, rng));
        const ApState B(draw_rf_chain_gains(3, rng));
        const auto p = pair_phase_offset(A, B);
        const cplx zA = A.chains()[0].t() * std::conj(A.chains()[0].r());
        const cplx zB = B.chains()[0].t() * std::conj(B.chains()[0].r());
        CHECK(std::abs(wrap_phase(p.phi - std::arg(zA * std::conj(zB)))) < 1e-12);
        CHECK(std::abs(wrap_phase(p.phi - (p.phi_A - p.phi_B))) < 1e-15);

        const cplx u = std::polar(1.0, rng.uniform(-kPi, kPi));
        std::vector<RfChain> rotated;
        for (const auto &c : A.chains())
            rotated.emplace_back(c.t() * u, c.r() * u);
        CHECK(std::abs(wrap_phase(pair_phase_offset(ApState(rotated), B).phi - p.phi)) < 1e-12);
    }
}

TEST_CASE("LoModel - increment variance formula")
{
    const LoModel lo2 = LoModel::make(kLo2Cvco, 3e9, 5e-8);
    const double expected = 4.0 * kPi * kPi * 3e9 * 3e9 * 1.4647e-21 * 5e-8;
    CHECK(std::abs(lo2.sigma_nu2 - expected) < 1e-15 * expected);
    CHECK(lo2.omega == 0.0);
    CHECK_THROWS_AS(LoModel::make(-1.0), std::invalid_argument);
}

TEST_CASE("wiener_phase_noise_path - noiseless LO is constant")
{
    LoModel lo = LoModel::make(0.0);
    lo.omega = 0.25;
    Rng rng(6);
    for (double w : wiener_phase_noise_path(lo, 10, rng))
        CHECK(w == 0.25);
    CHECK_THROWS_AS(wiener_phase_noise_path(lo, 0, rng), std::invalid_argument);
}

TEST_CASE("wiener_phase_noise_path - increments and linear variance growth")
{
    const LoModel base = LoModel::make(kLo1Cvco);
    Rng rng(7);
    const std::size_t paths = 10000, n = 20;
    double var1 = 0.0, varn = 0.0;
    for (std::size_t p = 0; p < paths; ++p)
    {
        LoModel lo = base;
        const auto w = wiener_phase_noise_path(lo, n, rng);
        CHECK(lo.omega == w.back());
        var1 += std::pow(w[1] - w[0], 2);
        varn += std::pow(w[n - 1] - w[0], 2);
    }
    var1 /= double(paths);
    varn /= double(paths);
    CHECK(std::abs(var1 / base.sigma_nu2 - 1.0) < 0.05);
    CHECK(std::abs(varn / (double(n - 1) * base.sigma_nu2) - 1.0) < 0.05);
}

TEST_CASE("wiener_phase_noise_path - consecutive calls continue one path")
{
    LoModel lo = LoModel::make(kLo1Cvco);
    Rng rng(8);
    const auto a = wiener_phase_noise_path(lo, 5, rng);
    const auto b = wiener_phase_noise_path(lo, 5, rng);
    CHECK(b.front() == a.back());
}

TEST_CASE("perturb_calibration - no drift cases and errors")
{
    Rng rng(9);
    const ApState ap(draw_rf_chain_gains(4, rng));
    for (const ApState &q : {perturb_calibration(ap, 3600.0, 0.0, rng), perturb_calibration(ap, 0.0, 1e-9, rng)})
        for (std::size_t m = 0; m < 4; ++m)
        {
            CHECK(q.chains()[m].t() == ap.chains()[m].t());
            CHECK(q.chains()[m].r() == ap.chains()[m].r());
        }
    CHECK_THROWS_AS(perturb_calibration(ap, -1.0, 1e-9, rng), std::invalid_argument);
}

TEST_CASE("perturb_calibration - calibration stays stale, 4 h reference drift gives about 0.027 rad")
{
    Rng rng(10);
    const std::size_t trials = 10000;
    double mad = 0.0;
    for (std::size_t t = 0; t < trials; ++t)
    {
        const ApState ap(draw_rf_chain_gains(2, rng));
        const ApState drifted = perturb_calibration(ap, kDriftHorizonS, kDriftReferenceVariance, rng);
        CHECK(drifted.calib() == ap.calib());
        const cplx fresh = internal_calibration(drifted.chains())[1];
        mad += std::abs(std::arg(fresh / ap.calib()[1]));
    }
    mad /= double(trials);
    CHECK(mad > 0.027 * 0.7);
    CHECK(mad < 0.027 * 1.3);
}

TEST_CASE("bidirectional_calibration_ratio - direct cases")
{
    const cplx g12(0.3, -1.1);
    const RfChain a1(cplx(0.5, 0.2), cplx(-0.3, 0.9));
    CHECK(std::abs(bidirectional_calibration_ratio(a1.t() * g12 * a1.r(), a1.t() * g12 * a1.r()) - cplx(1.0)) <
          1e-15);

    const RfChain c1(1.0, 1.0), c2(std::polar(1.0, kPi / 4), 1.0);
    const cplx z12 = c1.t() * g12 * c2.r();
    const cplx z21 = c2.t() * g12 * c1.r();
    CHECK(std::abs(std::arg(bidirectional_calibration_ratio(z12, z21)) + kPi / 4) < 1e-15);
    CHECK_THROWS_AS(bidirectional_calibration_ratio(1.0, 0.0), std::domain_error);
}

TEST_CASE("Property: two-antenna coherent-combining identity")
{
    Rng rng(11);
    for (int rep = 0; rep < 1000; ++rep)
    {
        const auto ch = draw_rf_chain_gains(3, rng); // antenna 1, antenna 2, UE
        const cplx g12 = rng.complex_normal(), g1 = rng.complex_normal(), g2 = rng.complex_normal();
        const cplx ratio =
            bidirectional_calibration_ratio(ch[0].t() * g12 * ch[1].r(), ch[1].t() * g12 * ch[0].r());
        const cplx h1 = conjugate_beamformed_gain(ch[2], ch[0], g1);
        const cplx h2 = conjugate_beamformed_gain(ch[2], ch[1], g2);
        CHECK(std::abs(wrap_phase(std::arg(ratio * h2) - std::arg(h1))) < 1e-10);
    }
}

TEST_CASE("draw_unit_phase_chain_gains - unit modulus, CN phases, same stream usage")
{
    Rng a(91), b(91);
    const auto cn = draw_rf_chain_gains(64, a);
    const auto up = draw_unit_phase_chain_gains(64, b);
    for (std::size_t m = 0; m < 64; ++m)
    {
        CHECK(std::abs(std::abs(up[m].t()) - 1.0) < 1e-15);
        CHECK(std::abs(std::abs(up[m].r()) - 1.0) < 1e-15);
        CHECK(std::abs(wrap_phase(std::arg(up[m].t()) - std::arg(cn[m].t()))) < 1e-15);
        CHECK(std::abs(wrap_phase(std::arg(up[m].r()) - std::arg(cn[m].r()))) < 1e-15);
    }
    CHECK(a.normal() == b.normal());
}

TEST_CASE("ApState::tx_gains - unit mean power, calibrated ratios, LO rotation")
{
    Rng rng(92);
    for (int trial = 0; trial < 50; ++trial)
    {
        LoModel lo;
        lo.omega = rng.uniform(-kPi, kPi);
        const ApState ap(draw_rf_chain_gains(7, rng), lo);
        const CVec e = ap.tx_gains();
        CHECK(std::abs(norm2(e) / 7.0 - 1.0) < 1e-12);
        // every chain then has the same transmit-to-receive ratio as the first
        const cplx ref = e[0] / ap.chains()[0].r();
        for (std::size_t m = 1; m < 7; ++m)
            CHECK(std::abs(e[m] / ap.chains()[m].r() - ref) < 1e-12 * std::abs(ref));
        // the positive scale keeps the reference phase t_1 / r_1 plus the LO phase
        CHECK(std::abs(wrap_phase(std::arg(ref) - std::arg(ap.reference_ratio()))) < 1e-12);
    }
}
