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

#ifndef BEAMSYNC_EXPERIMENTS_H
#define BEAMSYNC_EXPERIMENTS_H

#include "beamsync/baseline_fgb.hpp"
#include "beamsync/freq_sync.hpp"
#include "beamsync/phase_sync.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beamsync
{
    enum class Scheme
    {
        beamsync,
        fgb
    };

    enum class SyncMode
    {
        phase,
        freq
    };

    enum class LoKind
    {
        ideal,
        lo1,
        lo2
    };

    // Chain gain statistics: unit modulus with uniform phase, or CN(0, 1)
    enum class GainModel
    {
        unit_phase,
        cn
    };

    std::vector<RfChain> draw_chains(GainModel g, std::size_t M, Rng &rng);

    struct Scenario
    {
        std::size_t M_A = 16;
        std::size_t M_B = 16;
        std::size_t L = 16;
        std::size_t N = 100;
        std::size_t L_B = 16;
        std::size_t N_f = 10;
        std::size_t K = 1; // slave APs for budget and schedule
        std::vector<double> snr_grid_db = default_snr_grid();
        std::size_t trials = 10000;
        std::uint64_t seed = 42;
        Estimator estimator = Estimator::simple;
        Scheme scheme = Scheme::beamsync;
        SyncMode mode = SyncMode::phase;
        LoKind lo_kind = LoKind::ideal;
        GainModel gain_model = GainModel::unit_phase;
        double sigma_eps2 = 0.0;
        std::pair<double, double> delta_range_hz{-300.0, 300.0};
        double residual_delta_hz = 0.0;
        std::optional<double> resync_period_min;
        double horizon_min = 250.0;
        double f_c = kCarrierHz;
        double T = kSymbolTimeS;

        static std::vector<double> default_snr_grid();
        bool operator==(const Scenario &) const = default;
    };

    // Violated scenario constraint, tagged with the offending field
    class ScenarioError : public std::invalid_argument
    {
    public:
        ScenarioError(std::string key, const std::string &what);
        const std::string &key() const { return key_; }

    private:
        std::string key_;
    };

    void validate(const Scenario &s);

    LoModel lo_model(LoKind kind, double f_c = kCarrierHz);

    struct RmseRow
    {
        double x = 0.0;
        double rmse = 0.0;
        std::size_t trials = 0;
        std::size_t outliers = 0;
    };

    struct RmseTable
    {
        std::vector<RmseRow> rows;
    };

    // Per-trial results at one grid point, in trial order
    struct PointResult
    {
        std::vector<double> errors;
        std::vector<double> crb; // frequency mode only
        std::size_t outliers = 0;
    };

    PointResult run_point(const Scenario &s, std::size_t snr_index, unsigned workers = 1);
    RmseTable monte_carlo_rmse(const Scenario &s, unsigned workers = 1);

    struct TimelinePoint
    {
        double t_min = 0.0;
        double gain = 0.0;
        double mean_abs_dev_deg = 0.0;
    };

    // Minute-by-minute drift and resync; SNR is the first grid entry
    std::vector<TimelinePoint> simulate_timeline(const Scenario &s, unsigned workers = 1);
    std::vector<TimelinePoint> beamforming_gain_timeline(const Scenario &s, unsigned workers = 1);
    std::vector<TimelinePoint> phase_deviation_timeline(const Scenario &s, unsigned workers = 1);

    // |a + exp(j psi) b| for the two APs' UE-side array gains
    double combined_gain(double gain_A, double gain_B, double psi);

    struct MeasurementBudget
    {
        std::size_t beamsync = 0;
        std::size_t beamsweep = 0;
        std::size_t fgb = 0;
    };

    MeasurementBudget measurement_budget(std::size_t K, std::size_t M, std::size_t L, std::size_t N);

    enum class EventKind
    {
        master_broadcast,
        stage2,
        stage3,
        slave_pilot,
        master_sync
    };

    std::string to_string(EventKind k);

    struct SyncEvent
    {
        EventKind kind;
        std::size_t slave = 0; // 1..K; 0 for the master broadcast
        std::size_t start = 0; // first slot
        std::size_t length = 0;
    };

    struct SlotLengths
    {
        std::size_t L = 16;
        std::size_t N = 100;
        std::size_t L_B = 16;
        std::size_t N_f = 10;
    };

    std::vector<SyncEvent> multi_ap_schedule(std::size_t K, SyncMode mode, const SlotLengths &len = {});

    // Runs a phase schedule; returns each slave's wrapped phase error
    std::vector<double> execute_phase_schedule(const std::vector<SyncEvent> &schedule, ApState &master,
                                               std::vector<ApState> &slaves,
                                               const std::vector<ChannelRealization> &channels,
                                               const PhaseKnobs &knobs, Rng &rng);

    // Runs a frequency schedule; returns each slave's error in cycles/sample
    std::vector<double> execute_freq_schedule(const std::vector<SyncEvent> &schedule, ApState &master,
                                              std::vector<ApState> &slaves,
                                              const std::vector<ChannelRealization> &channels,
                                              const FreqKnobs &knobs, Rng &rng);

    struct CrbRow
    {
        std::size_t N_f = 0;
        double snr_db = 0.0;
        double mean_crb = 0.0;
        double median_crb = 0.0;
    };

    // CRB over random hardware/channels with the sync beam along the dominant direction
    std::vector<CrbRow> crb_sweep(const Scenario &s, const std::vector<std::size_t> &n_f_values);
}

#endif
