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

#include "beamsync/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace beamsync
{
    std::vector<double> Scenario::default_snr_grid()
    {
        std::vector<double> g;
        for (int s = -30; s <= 30; s += 3)
            g.push_back(double(s));
        return g;
    }

    ScenarioError::ScenarioError(std::string key, const std::string &what)
        : std::invalid_argument(key + ": " + what), key_(std::move(key))
    {
    }

    void validate(const Scenario &s)
    {
        auto need = [](bool ok, const char *key, const std::string &msg)
        {
            if (!ok)
                throw ScenarioError(key, msg);
        };
        need(s.M_A >= 1, "M_A", "must be >= 1");
        need(s.M_B >= 1, "M_B", "must be >= 1");
        need(s.L >= s.M_A, "L", "must be >= M_A");
        need(s.N >= 1, "N", "must be >= 1");
        need(s.L_B >= s.M_B, "L_B", "must be >= M_B");
        need(s.N_f >= 2, "N_f", "must be >= 2");
        need(s.K >= 1, "K", "must be >= 1");
        need(!s.snr_grid_db.empty(), "snr_grid_db", "must not be empty");
        need(std::is_sorted(s.snr_grid_db.begin(), s.snr_grid_db.end()), "snr_grid_db", "must be ascending");
        need(std::all_of(s.snr_grid_db.begin(), s.snr_grid_db.end(), [](double v) { return std::isfinite(v); }),
             "snr_grid_db", "must be finite");
        need(s.trials >= 1, "trials", "must be >= 1");
        need(s.sigma_eps2 >= 0.0, "sigma_eps2", "must be >= 0");
        need(s.delta_range_hz.first < s.delta_range_hz.second, "delta_range_hz", "lower bound must be below upper");
        need(s.f_c > 0.0, "f_c", "must be positive");
        need(s.T > 0.0, "T", "must be positive");
        need(std::abs(s.delta_range_hz.first) * s.T < 0.5 && std::abs(s.delta_range_hz.second) * s.T < 0.5,
             "delta_range_hz", "exceeds the unambiguous range 1/(2T)");
        need(!s.resync_period_min || *s.resync_period_min >= 1.0, "resync_period_min", "must be >= 1 minute");
        need(s.horizon_min >= 0.0, "horizon_min", "must be >= 0");
        need(s.scheme == Scheme::beamsync || s.estimator != Estimator::nls, "estimator",
             "nls applies to the beamsync scheme only");
    }

    std::vector<RfChain> draw_chains(GainModel g, std::size_t M, Rng &rng)
    {
        return g == GainModel::cn ? draw_rf_chain_gains(M, rng) : draw_unit_phase_chain_gains(M, rng);
    }

    LoModel lo_model(LoKind kind, double f_c)
    {
        switch (kind)
        {
        case LoKind::lo1:
            return LoModel::make(kLo1Cvco, f_c);
        case LoKind::lo2:
            return LoModel::make(kLo2Cvco, f_c);
        default:
            return LoModel::make(0.0, f_c);
        }
    }

    namespace
    {
        // Calls body(i) for i in [0, n) on up to `workers` threads
        template <typename Body>
        void parallel_for(std::size_t n, unsigned workers, Body body)
        {
            const unsigned w = std::max(1u, std::min<unsigned>(workers, unsigned(std::max<std::size_t>(n, 1))));
            if (w == 1)
            {
                for (std::size_t i = 0; i < n; ++i)
                    body(i);
                return;
            }
            std::exception_ptr err;
            std::mutex mtx;
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < w; ++t)
                pool.emplace_back(
                    [&, t]()
                    {
                        try
                        {
                            for (std::size_t i = t; i < n; i += w)
                                body(i);
                        }
                        catch (...)
                        {
                            std::lock_guard<std::mutex> lock(mtx);
                            if (!err)
                                err = std::current_exception();
                        }
                    });
            for (auto &th : pool)
                th.join();
            if (err)
                std::rethrow_exception(err);
        }

        struct TrialOutcome
        {
            double error = 0.0;
            double crb = 0.0;
            bool outlier = false;
        };

        TrialOutcome phase_trial(const Scenario &s, double sigma2, Rng &rng)
        {
            const LoModel lo = lo_model(s.lo_kind, s.f_c);
            ApState apA(draw_chains(s.gain_model, s.M_A, rng), lo);
            ApState apB(draw_chains(s.gain_model, s.M_B, rng), lo);
            const ChannelRealization ch = draw_rayleigh(s.M_A, s.M_B, rng);

            PhaseKnobs k;
            k.L = s.L;
            k.N = s.N;
            k.sigma2 = sigma2;
            k.estimator = s.estimator;
            k.phase_noise = s.lo_kind != LoKind::ideal;
            k.residual_delta_hz = s.residual_delta_hz;
            k.T = s.T;

            TrialOutcome out;
            try
            {
                const PhaseTrace tr = s.scheme == Scheme::fgb ? run_fgb_phase_protocol(apA, apB, ch, k, rng)
                                                              : run_phase_protocol(apA, apB, ch, k, rng);
                out.error = tr.error;
            }
            catch (const DegenerateEstimateError &)
            {
                out.outlier = true;
            }
            catch (const NotConvergedError &)
            {
                out.outlier = true;
            }
            catch (const NotPositiveDefiniteError &)
            {
                out.outlier = true;
            }
            if (out.outlier)
                out.error = wrap_phase(rng.uniform(-kPi, kPi));
            return out;
        }

        FreqKnobs freq_knobs(const Scenario &s, double sigma2)
        {
            FreqKnobs k;
            k.L_B = s.L_B;
            k.N_f = s.N_f;
            k.sigma2 = sigma2;
            k.search.lo_hz = s.delta_range_hz.first;
            k.search.hi_hz = s.delta_range_hz.second;
            k.search.T = s.T;
            k.pcsi = s.estimator == Estimator::pcsi;
            return k;
        }

        TrialOutcome freq_trial(const Scenario &s, double sigma2, Rng &rng)
        {
            const LoModel lo = lo_model(LoKind::ideal, s.f_c);
            ApState apA(draw_chains(s.gain_model, s.M_A, rng), lo);
            ApState apB(draw_chains(s.gain_model, s.M_B, rng), lo);
            const ChannelRealization ch = draw_rayleigh(s.M_A, s.M_B, rng);
            const double delta = rng.uniform(s.delta_range_hz.first, s.delta_range_hz.second);
            apA.lo().delta_f = delta;

            const FreqKnobs k = freq_knobs(s, sigma2);
            TrialOutcome out;
            try
            {
                const FreqTrace tr = s.scheme == Scheme::fgb ? run_fgb_freq_protocol(apA, apB, ch, k, rng)
                                                             : run_freq_protocol(apA, apB, ch, k, rng);
                out.error = tr.error;
                out.crb = tr.crb;
                out.outlier = tr.boundary;
            }
            catch (const NotConvergedError &)
            {
                out.error = (delta - rng.uniform(s.delta_range_hz.first, s.delta_range_hz.second)) * s.T;
                out.outlier = true;
            }
            catch (const std::domain_error &)
            {
                out.error = (delta - rng.uniform(s.delta_range_hz.first, s.delta_range_hz.second)) * s.T;
                out.outlier = true;
            }
            return out;
        }
    }

    PointResult run_point(const Scenario &s, std::size_t snr_index, unsigned workers)
    {
        validate(s);
        if (snr_index >= s.snr_grid_db.size())
            throw std::out_of_range("run_point: SNR index out of range");
        const double sigma2 = snr_to_sigma2(s.snr_grid_db[snr_index]).sigma2;

        std::vector<TrialOutcome> outcomes(s.trials);
        parallel_for(s.trials, workers,
                     [&](std::size_t t)
                     {
                         Rng rng = Rng::for_trial(s.seed, snr_index, t);
                         outcomes[t] = s.mode == SyncMode::phase ? phase_trial(s, sigma2, rng)
                                                                 : freq_trial(s, sigma2, rng);
                     });

        PointResult r;
        r.errors.reserve(s.trials);
        if (s.mode == SyncMode::freq)
            r.crb.reserve(s.trials);
        for (const auto &o : outcomes)
        {
            r.errors.push_back(o.error);
            if (s.mode == SyncMode::freq)
                r.crb.push_back(o.crb);
            r.outliers += o.outlier ? 1 : 0;
        }
        return r;
    }

    RmseTable monte_carlo_rmse(const Scenario &s, unsigned workers)
    {
        validate(s);
        RmseTable table;
        for (std::size_t i = 0; i < s.snr_grid_db.size(); ++i)
        {
            const PointResult r = run_point(s, i, workers);
            double sum = 0.0;
            for (double e : r.errors)
                sum += e * e;
            table.rows.push_back({s.snr_grid_db[i], std::sqrt(sum / double(r.errors.size())), r.errors.size(),
                                  r.outliers});
        }
        return table;
    }

    double combined_gain(double gain_A, double gain_B, double psi)
    {
        return std::abs(gain_A + std::polar(gain_B, psi));
    }

    namespace
    {
        // Angle of the UE-side composite downlink gain of one AP under conjugate beamforming
        cplx ue_composite(const ApState &ap, std::span<const cplx> g)
        {
            const CVec e = ap.tx_gains();
            cplx h = 0.0;
            for (std::size_t m = 0; m < ap.size(); ++m)
                h += std::norm(g[m]) * std::conj(ap.chains()[m].r()) * e[m];
            return h;
        }

        struct TimelineTrial
        {
            std::vector<double> gain;
            std::vector<double> abs_dev;
        };

        TimelineTrial timeline_trial(const Scenario &s, std::size_t steps, Rng &rng)
        {
            const LoModel lo = lo_model(s.lo_kind, s.f_c);
            ApState apA(draw_chains(s.gain_model, s.M_A, rng), lo);
            ApState apB(draw_chains(s.gain_model, s.M_B, rng), lo);

            PhaseKnobs k;
            k.L = s.L;
            k.N = s.N;
            k.sigma2 = snr_to_sigma2(s.snr_grid_db.front()).sigma2;
            k.estimator = s.estimator;
            k.phase_noise = s.lo_kind != LoKind::ideal;
            k.T = s.T;

            auto sync = [&]()
            {
                const ChannelRealization ch = draw_rayleigh(s.M_A, s.M_B, rng);
                try
                {
                    return run_phase_protocol(apA, apB, ch, k, rng).phi_hat;
                }
                catch (const std::runtime_error &)
                {
                    return wrap_phase(rng.uniform(-kPi, kPi));
                }
            };

            // LO drift accumulates once per symbol period
            const double samples_per_min = 60.0 / s.T;
            const double lo_step_sd = std::sqrt(lo.sigma_nu2 * samples_per_min);
            const double cfo_step = 2.0 * kPi * s.residual_delta_hz * 60.0;

            TimelineTrial out{std::vector<double>(steps), std::vector<double>(steps)};
            double correction = sync();
            for (std::size_t i = 0; i < steps; ++i)
            {
                if (i > 0)
                {
                    apA.lo().omega += lo_step_sd * rng.normal() + cfo_step;
                    apB.lo().omega += lo_step_sd * rng.normal();
                    apA = perturb_calibration(apA, 60.0, s.sigma_eps2, rng);
                    apB = perturb_calibration(apB, 60.0, s.sigma_eps2, rng);
                    if (s.resync_period_min)
                    {
                        const double t = double(i);
                        const double period = *s.resync_period_min;
                        if (std::abs(t / period - std::round(t / period)) < 1e-9)
                            correction = sync();
                    }
                }
                CVec gA(s.M_A), gB(s.M_B);
                for (auto &z : gA)
                    z = rng.complex_normal();
                for (auto &z : gB)
                    z = rng.complex_normal();
                const double psi =
                    wrap_phase(std::arg(ue_composite(apA, gA)) - std::arg(ue_composite(apB, gB)) - correction);
                out.gain[i] = combined_gain(norm2(gA), norm2(gB), psi);
                out.abs_dev[i] = std::abs(psi) * 180.0 / kPi;
            }
            return out;
        }
    }

    std::vector<TimelinePoint> simulate_timeline(const Scenario &s, unsigned workers)
    {
        validate(s);
        const std::size_t steps = std::size_t(std::floor(s.horizon_min + 1e-9)) + 1;
        std::vector<TimelineTrial> trials(s.trials);
        parallel_for(s.trials, workers,
                     [&](std::size_t t)
                     {
                         Rng rng = Rng::for_trial(s.seed, 0, t);
                         trials[t] = timeline_trial(s, steps, rng);
                     });

        std::vector<TimelinePoint> pts(steps);
        for (std::size_t i = 0; i < steps; ++i)
        {
            double g = 0.0, d = 0.0;
            for (const auto &tr : trials)
            {
                g += tr.gain[i];
                d += tr.abs_dev[i];
            }
            pts[i] = {double(i), g / double(s.trials), d / double(s.trials)};
        }
        return pts;
    }

    std::vector<TimelinePoint> beamforming_gain_timeline(const Scenario &s, unsigned workers)
    {
        return simulate_timeline(s, workers);
    }

    std::vector<TimelinePoint> phase_deviation_timeline(const Scenario &s, unsigned workers)
    {
        return simulate_timeline(s, workers);
    }

    MeasurementBudget measurement_budget(std::size_t K, std::size_t M, std::size_t L, std::size_t N)
    {
        if (M == 0 || L == 0 || N == 0)
            throw std::invalid_argument("measurement_budget: M, L and N must be >= 1");
        return {L + 2 * K * N, (K + 1) * M * M, M * M};
    }

    std::string to_string(EventKind k)
    {
        switch (k)
        {
        case EventKind::master_broadcast:
            return "master_broadcast";
        case EventKind::stage2:
            return "stage2";
        case EventKind::stage3:
            return "stage3";
        case EventKind::slave_pilot:
            return "slave_pilot";
        case EventKind::master_sync:
            return "master_sync";
        }
        return "unknown";
    }

    std::vector<SyncEvent> multi_ap_schedule(std::size_t K, SyncMode mode, const SlotLengths &len)
    {
        if (K == 0)
            throw std::invalid_argument("multi_ap_schedule: K must be >= 1");
        std::vector<SyncEvent> ev;
        std::size_t slot = 0;
        auto push = [&](EventKind kind, std::size_t slave, std::size_t length)
        {
            ev.push_back({kind, slave, slot, length});
            slot += length;
        };
        if (mode == SyncMode::phase)
        {
            push(EventKind::master_broadcast, 0, len.L);
            for (std::size_t k = 1; k <= K; ++k)
            {
                push(EventKind::stage2, k, len.N);
                push(EventKind::stage3, k, len.N);
            }
        }
        else
        {
            for (std::size_t k = 1; k <= K; ++k)
            {
                push(EventKind::slave_pilot, k, len.L_B);
                push(EventKind::master_sync, k, len.N_f);
            }
        }
        return ev;
    }

    namespace
    {
        void check_schedule_inputs(const std::vector<SyncEvent> &schedule, std::size_t slaves, std::size_t channels)
        {
            if (slaves != channels)
                throw DimensionError("schedule: one channel per slave is required");
            for (const auto &e : schedule)
                if (e.slave > slaves)
                    throw std::invalid_argument("schedule: event refers to a missing slave");
        }
    }

    std::vector<double> execute_phase_schedule(const std::vector<SyncEvent> &schedule, ApState &master,
                                               std::vector<ApState> &slaves,
                                               const std::vector<ChannelRealization> &channels,
                                               const PhaseKnobs &knobs, Rng &rng)
    {
        check_schedule_inputs(schedule, slaves.size(), channels.size());
        const NoiseModel noise{knobs.sigma2};
        const std::size_t K = slaves.size();
        std::vector<CMat> Y_B1(K), Y_A1(K);
        std::vector<CVec> beam(K);
        std::vector<SyncSignal> x(K);
        std::vector<double> errors(K, 0.0);

        for (const auto &e : schedule)
        {
            switch (e.kind)
            {
            case EventKind::master_broadcast:
            {
                // One pilot transmission, overheard by every slave through its own channel
                const PilotMatrix pilot = make_pilot(knobs.L, master.size());
                for (std::size_t k = 0; k < K; ++k)
                    Y_B1[k] = stage1_phase(master, slaves[k], channels[k], noise, pilot, rng);
                break;
            }
            case EventKind::stage2:
            {
                const std::size_t k = e.slave - 1;
                if (Y_B1[k].empty())
                    throw std::logic_error("schedule: stage II before the master broadcast");
                x[k] = make_sync_signal(knobs.N, rng);
                beam[k] = estimate_beam_direction(Y_B1[k]);
                Y_A1[k] = stage2_phase(slaves[k], master, beam[k], x[k], channels[k], noise, rng);
                break;
            }
            case EventKind::stage3:
            {
                const std::size_t k = e.slave - 1;
                if (Y_A1[k].empty())
                    throw std::logic_error("schedule: stage III before stage II");
                const Stage3Result s3 = stage3_phase(master, slaves[k], Y_A1[k], channels[k], noise, rng);
                const double phi_hat = simple_phase_estimate(beam[k], s3.Y_B2, x[k]);
                errors[k] = wrap_phase(phi_hat - pair_phase_offset(master, slaves[k]).phi);
                break;
            }
            default:
                throw std::invalid_argument("schedule: frequency event in a phase schedule");
            }
        }
        return errors;
    }

    std::vector<double> execute_freq_schedule(const std::vector<SyncEvent> &schedule, ApState &master,
                                              std::vector<ApState> &slaves,
                                              const std::vector<ChannelRealization> &channels,
                                              const FreqKnobs &knobs, Rng &rng)
    {
        check_schedule_inputs(schedule, slaves.size(), channels.size());
        const NoiseModel noise{knobs.sigma2};
        const double T = knobs.search.T;
        const CVec x_f = make_freq_sync_signal(knobs.N_f);
        const std::size_t K = slaves.size();
        std::vector<CMat> Y_A(K);
        std::vector<double> errors(K, 0.0);

        for (const auto &e : schedule)
        {
            const std::size_t k = e.slave - 1;
            switch (e.kind)
            {
            case EventKind::slave_pilot:
            {
                const double delta = freq_offset_truth(master, slaves[k], T).delta;
                Y_A[k] = stage1_freq(slaves[k], master, channels[k], noise, delta, T,
                                     make_pilot(knobs.L_B, slaves[k].size()), rng);
                break;
            }
            case EventKind::master_sync:
            {
                if (Y_A[k].empty())
                    throw std::logic_error("schedule: master sync before the slave pilot");
                const double delta = freq_offset_truth(master, slaves[k], T).delta;
                const CVec a_f = estimate_beam_direction_freq(Y_A[k]);
                const CMat Y_B = stage2_freq(master, slaves[k], a_f, x_f, channels[k], noise, delta, T, rng);
                errors[k] = (delta - ml_freq_estimate(Y_B, x_f, knobs.search).delta_hat) * T;
                break;
            }
            default:
                throw std::invalid_argument("schedule: phase event in a frequency schedule");
            }
        }
        return errors;
    }

    std::vector<CrbRow> crb_sweep(const Scenario &s, const std::vector<std::size_t> &n_f_values)
    {
        validate(s);
        // Only ||b||^2 depends on the random draw; the CRB then factors over SNR and N_f
        std::vector<double> inv_b2(s.trials);
        for (std::size_t t = 0; t < s.trials; ++t)
        {
            Rng rng = Rng::for_trial(s.seed, 0, t);
            ApState apA(draw_chains(s.gain_model, s.M_A, rng));
            ApState apB(draw_chains(s.gain_model, s.M_B, rng));
            const ChannelRealization ch = draw_rayleigh(s.M_A, s.M_B, rng);
            const CVec a_f =
                conj(dominant_left_singular_vector(effective_channel(ch, apA.rx_gains(), apB.rx_gains())).u);
            const CMat b = over_the_air(Link::a_to_b, apA, apB, ch, CMat::column(a_f), 0.0, rng);
            inv_b2[t] = 1.0 / b.frobenius_norm2();
        }
        std::vector<double> sorted = inv_b2;
        std::sort(sorted.begin(), sorted.end());
        const double mean_inv = std::accumulate(inv_b2.begin(), inv_b2.end(), 0.0) / double(s.trials);
        const std::size_t n = sorted.size();
        const double median_inv = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

        std::vector<CrbRow> rows;
        for (std::size_t nf : n_f_values)
        {
            const double den = crb_denominator(make_freq_sync_signal(nf));
            for (double snr : s.snr_grid_db)
            {
                const double scale = snr_to_sigma2(snr).sigma2 / (8.0 * kPi * kPi * den);
                rows.push_back({nf, snr, scale * mean_inv, scale * median_inv});
            }
        }
        return rows;
    }
}
