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

#include "beamsync/hardware.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsync
{
    double wrap_phase(double x)
    {
        double y = std::remainder(x, 2.0 * kPi);
        if (y <= -kPi)
            y += 2.0 * kPi;
        return y;
    }

    RfChain::RfChain(cplx t, cplx r) : t_(t), r_(r)
    {
        if (!(std::abs(t) > 0.0) || !(std::abs(r) > 0.0))
            throw std::invalid_argument("RfChain: transmit and receive gains must be nonzero");
    }

    LoModel LoModel::make(double c_vco, double f_c, double T_s)
    {
        if (c_vco < 0.0 || f_c <= 0.0 || T_s <= 0.0)
            throw std::invalid_argument("LoModel: c_vco must be >= 0, f_c and T_s positive");
        LoModel lo;
        lo.c_vco = c_vco;
        lo.f_c = f_c;
        lo.T_s = T_s;
        lo.sigma_nu2 = 4.0 * kPi * kPi * f_c * f_c * c_vco * T_s;
        return lo;
    }

    ApState::ApState(std::vector<RfChain> chains, LoModel lo) : chains_(std::move(chains)), lo_(lo)
    {
        if (chains_.empty())
            throw std::invalid_argument("ApState: at least one RF chain is required");
        calib_ = internal_calibration(chains_);
    }

    ApState::ApState(std::vector<RfChain> chains, LoModel lo, CVec calib)
        : chains_(std::move(chains)), lo_(lo), calib_(std::move(calib))
    {
        if (chains_.empty())
            throw std::invalid_argument("ApState: at least one RF chain is required");
        if (calib_.size() != chains_.size())
            throw DimensionError("ApState: calibration length does not match antenna count");
        if (calib_[0] != cplx(1.0))
            throw std::invalid_argument("ApState: calibration of the first antenna must be 1");
    }

    CVec ApState::rx_gains() const
    {
        CVec r(chains_.size());
        for (std::size_t m = 0; m < r.size(); ++m)
            r[m] = chains_[m].r();
        return r;
    }

    CVec ApState::tx_gains() const
    {
        const cplx lo_rot = std::polar(1.0, lo_.omega);
        CVec e(chains_.size());
        for (std::size_t m = 0; m < e.size(); ++m)
            e[m] = chains_[m].t() * calib_[m];
        // Fixed radiated power: a positive per-AP scale leaves the calibration and phi untouched
        const double s = std::sqrt(double(e.size()) / norm2(e));
        for (auto &v : e)
            v *= s * lo_rot;
        return e;
    }

    cplx ApState::reference_ratio() const
    {
        return chains_[0].t() / chains_[0].r() * std::polar(1.0, lo_.omega);
    }

    std::vector<RfChain> draw_rf_chain_gains(std::size_t M, Rng &rng)
    {
        if (M == 0)
            throw std::invalid_argument("draw_rf_chain_gains: M must be >= 1");
        auto draw = [&rng]()
        {
            cplx z = rng.complex_normal();
            while (std::abs(z) < 1e-12)
                z = rng.complex_normal();
            return z;
        };
        std::vector<RfChain> chains;
        chains.reserve(M);
        for (std::size_t m = 0; m < M; ++m)
        {
            const cplx t = draw();
            const cplx r = draw();
            chains.emplace_back(t, r);
        }
        return chains;
    }

    std::vector<RfChain> draw_unit_phase_chain_gains(std::size_t M, Rng &rng)
    {
        std::vector<RfChain> chains = draw_rf_chain_gains(M, rng);
        for (auto &c : chains)
            c = RfChain(c.t() / std::abs(c.t()), c.r() / std::abs(c.r()));
        return chains;
    }

    CVec internal_calibration(const std::vector<RfChain> &chains)
    {
        CVec c(chains.size());
        if (chains.empty())
            return c;
        const cplx ref = chains[0].t() / chains[0].r();
        c[0] = 1.0;
        for (std::size_t m = 1; m < chains.size(); ++m)
            c[m] = ref * chains[m].r() / chains[m].t();
        return c;
    }

    CVec internal_calibration(const ApState &ap) { return internal_calibration(ap.chains()); }

    PhaseOffsetTruth pair_phase_offset(const ApState &apA, const ApState &apB)
    {
        PhaseOffsetTruth p;
        const auto &a = apA.chains()[0];
        const auto &b = apB.chains()[0];
        p.phi_A = wrap_phase(std::arg(a.t()) - std::arg(a.r()) + apA.lo().omega);
        p.phi_B = wrap_phase(std::arg(b.t()) - std::arg(b.r()) + apB.lo().omega);
        p.phi = wrap_phase(p.phi_A - p.phi_B);
        return p;
    }

    std::vector<double> wiener_phase_noise_path(LoModel &lo, std::size_t n, Rng &rng)
    {
        if (n == 0)
            throw std::invalid_argument("wiener_phase_noise_path: n must be >= 1");
        std::vector<double> w(n);
        w[0] = lo.omega;
        const double s = std::sqrt(lo.sigma_nu2);
        for (std::size_t k = 1; k < n; ++k)
            w[k] = w[k - 1] + (s > 0.0 ? s * rng.normal() : 0.0);
        lo.omega = w[n - 1];
        return w;
    }

    double drift_relative_variance(double elapsed_s, double sigma_eps2)
    {
        // Anchored so the reference variance over the full horizon gives a 0.027 rad mean
        // absolute deviation of the calibration coefficient angle (four independent gains)
        constexpr double mean_abs_dev = 0.027;
        const double ref = kPi * mean_abs_dev * mean_abs_dev / 4.0;
        return ref * (sigma_eps2 / kDriftReferenceVariance) * (elapsed_s / kDriftHorizonS);
    }

    ApState perturb_calibration(const ApState &ap, double elapsed_s, double sigma_eps2, Rng &rng)
    {
        if (elapsed_s < 0.0)
            throw std::invalid_argument("perturb_calibration: elapsed time must be >= 0");
        if (sigma_eps2 < 0.0)
            throw std::invalid_argument("perturb_calibration: sigma_eps2 must be >= 0");
        if (sigma_eps2 == 0.0 || elapsed_s == 0.0)
            return ap;

        const double var = drift_relative_variance(elapsed_s, sigma_eps2);
        std::vector<RfChain> chains;
        chains.reserve(ap.size());
        for (const auto &c : ap.chains())
        {
            cplx t = c.t() * (1.0 + rng.complex_normal(var));
            cplx r = c.r() * (1.0 + rng.complex_normal(var));
            if (std::abs(t) < 1e-12)
                t = c.t();
            if (std::abs(r) < 1e-12)
                r = c.r();
            chains.emplace_back(t, r);
        }
        return ApState(std::move(chains), ap.lo(), ap.calib());
    }

    cplx bidirectional_calibration_ratio(cplx z12, cplx z21)
    {
        if (std::abs(z21) < 1e-14)
            throw std::domain_error("bidirectional_calibration_ratio: reverse measurement is zero");
        return z12 / z21;
    }

    cplx conjugate_beamformed_gain(const RfChain &ue, const RfChain &antenna, cplx g)
    {
        const cplx uplink = ue.t() * g * antenna.r();
        const cplx downlink = antenna.t() * g * ue.r();
        return std::conj(uplink) * downlink;
    }
}
