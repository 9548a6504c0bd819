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

#ifndef BEAMSYNC_HARDWARE_H
#define BEAMSYNC_HARDWARE_H

#include "beamsync/cmatrix.hpp"
#include "beamsync/rng.hpp"

#include <cstddef>
#include <vector>

namespace beamsync
{
    inline constexpr double kPi = 3.14159265358979323846;
    inline constexpr double kCarrierHz = 3e9;
    inline constexpr double kSampleIntervalS = 50e-9; // 20 MHz bandwidth
    inline constexpr double kSymbolTimeS = 1e-3 / 14.0;
    inline constexpr double kLo1Cvco = 1.7610e-19;
    inline constexpr double kLo2Cvco = 1.4647e-21;
    inline constexpr double kDriftHorizonS = 4.0 * 3600.0;
    inline constexpr double kDriftReferenceVariance = 2.5118864315095797e-10; // 10^-9.6

    // Wraps to (-pi, pi]
    double wrap_phase(double x);

    // One transmit/receive chain; both gains nonzero
    class RfChain
    {
    public:
        RfChain(cplx t, cplx r);
        cplx t() const { return t_; }
        cplx r() const { return r_; }

    private:
        cplx t_;
        cplx r_;
    };

    struct LoModel
    {
        double c_vco = 0.0;
        double f_c = kCarrierHz;
        double T_s = kSampleIntervalS;
        double sigma_nu2 = 0.0;
        double omega = 0.0;
        double delta_f = 0.0;

        static LoModel make(double c_vco, double f_c = kCarrierHz, double T_s = kSampleIntervalS);
    };

    // An access point and its internal reciprocity calibration
    class ApState
    {
    public:
        explicit ApState(std::vector<RfChain> chains, LoModel lo = {});
        // Keeps a previously computed (possibly stale) calibration
        ApState(std::vector<RfChain> chains, LoModel lo, CVec calib);

        std::size_t size() const { return chains_.size(); }
        const std::vector<RfChain> &chains() const { return chains_; }
        const CVec &calib() const { return calib_; }
        const LoModel &lo() const { return lo_; }
        LoModel &lo() { return lo_; }

        CVec rx_gains() const;
        // Transmit gains seen on air: chain gain, calibration, LO phase, scaled to unit mean power
        CVec tx_gains() const;
        // t_1 / r_1 rotated by the current LO phase
        cplx reference_ratio() const;

    private:
        std::vector<RfChain> chains_;
        LoModel lo_;
        CVec calib_;
    };

    struct PhaseOffsetTruth
    {
        double phi_A = 0.0;
        double phi_B = 0.0;
        double phi = 0.0;
    };

    std::vector<RfChain> draw_rf_chain_gains(std::size_t M, Rng &rng);
    // Same stream usage as draw_rf_chain_gains, magnitudes set to one
    std::vector<RfChain> draw_unit_phase_chain_gains(std::size_t M, Rng &rng);

    CVec internal_calibration(const std::vector<RfChain> &chains);
    CVec internal_calibration(const ApState &ap);

    // Reference-antenna phase difference, including each AP's accumulated LO phase
    PhaseOffsetTruth pair_phase_offset(const ApState &apA, const ApState &apB);

    // omega[0] is the current LO phase; the LO ends at omega[n-1]
    std::vector<double> wiener_phase_noise_path(LoModel &lo, std::size_t n, Rng &rng);

    // Multiplicative complex Gaussian random walk on every t and r; calibration is left stale
    ApState perturb_calibration(const ApState &ap, double elapsed_s, double sigma_eps2, Rng &rng);

    // Relative per-gain variance accumulated over elapsed_s
    double drift_relative_variance(double elapsed_s, double sigma_eps2);

    cplx bidirectional_calibration_ratio(cplx z12, cplx z21);

    // UE-side composite gain when antenna i beamforms with the conjugate of its uplink estimate
    cplx conjugate_beamformed_gain(const RfChain &ue, const RfChain &antenna, cplx g);
}

#endif
