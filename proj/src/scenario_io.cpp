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

#include "beamsync/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace beamsync
{
    ScenarioParseError::ScenarioParseError(std::string source, std::size_t line, std::string key,
                                           const std::string &what)
        : std::invalid_argument(source + (line ? ":" + std::to_string(line) : std::string()) + ": key '" + key +
                                "': " + what),
          line_(line), key_(std::move(key))
    {
    }

    std::string format_number(double v)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    namespace
    {
        const std::vector<std::string> &scenario_keys()
        {
            static const std::vector<std::string> keys = {
                "M_A", "M_B", "L", "N", "L_B", "N_f", "K", "snr_grid_db", "trials", "seed", "estimator", "scheme",
                "mode", "lo_kind", "gain_model", "sigma_eps2", "delta_range_hz", "residual_delta_hz", "resync_period_min",
                "horizon_min", "f_c", "T"};
            return keys;
        }

        std::string_view trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string_view> split(std::string_view s, char sep)
        {
            std::vector<std::string_view> parts;
            std::size_t start = 0;
            while (true)
            {
                const auto p = s.find(sep, start);
                parts.push_back(trim(s.substr(start, p == std::string_view::npos ? s.npos : p - start)));
                if (p == std::string_view::npos)
                    break;
                start = p + 1;
            }
            return parts;
        }

        // Value conversion; throws std::invalid_argument with a short reason
        double to_double(std::string_view v)
        {
            double x = 0.0;
            if (!v.empty() && v.front() == '+')
                v.remove_prefix(1);
            const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
            if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty())
                throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
            return x;
        }

        std::uint64_t to_u64(std::string_view v)
        {
            std::uint64_t x = 0;
            const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
            if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty())
                throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
            return x;
        }

        std::size_t to_count(std::string_view v) { return std::size_t(to_u64(v)); }

        std::vector<double> to_grid(std::string_view v)
        {
            std::vector<double> g;
            if (v.find(':') != std::string_view::npos)
            {
                const auto p = split(v, ':');
                if (p.size() != 3)
                    throw std::invalid_argument("range must be start:step:stop");
                const double a = to_double(p[0]), step = to_double(p[1]), b = to_double(p[2]);
                if (!(step > 0.0) || b < a)
                    throw std::invalid_argument("range needs a positive step and stop >= start");
                const auto n = std::size_t(std::floor((b - a) / step + 1e-9));
                for (std::size_t i = 0; i <= n; ++i)
                    g.push_back(a + double(i) * step);
                return g;
            }
            for (auto part : split(v, ','))
                g.push_back(to_double(part));
            return g;
        }

        template <typename E>
        E to_enum(std::string_view v, std::initializer_list<std::pair<std::string_view, E>> options)
        {
            std::string names;
            for (const auto &[name, value] : options)
            {
                if (name == v)
                    return value;
                names += (names.empty() ? "" : "|") + std::string(name);
            }
            throw std::invalid_argument("expected one of " + names + ", got '" + std::string(v) + "'");
        }

        std::string estimator_name(Estimator e)
        {
            return e == Estimator::simple ? "simple" : e == Estimator::nls ? "nls" : "pcsi";
        }

        std::string scheme_name(Scheme s) { return s == Scheme::beamsync ? "beamsync" : "fgb"; }
        std::string mode_name(SyncMode m) { return m == SyncMode::phase ? "phase" : "freq"; }

        std::string lo_name(LoKind k)
        {
            return k == LoKind::ideal ? "ideal" : k == LoKind::lo1 ? "lo1" : "lo2";
        }

        std::string gain_name(GainModel g) { return g == GainModel::cn ? "cn" : "unit_phase"; }

        void assign(Scenario &s, const std::string &key, std::string_view v)
        {
            if (key == "M_A")
                s.M_A = to_count(v);
            else if (key == "M_B")
                s.M_B = to_count(v);
            else if (key == "L")
                s.L = to_count(v);
            else if (key == "N")
                s.N = to_count(v);
            else if (key == "L_B")
                s.L_B = to_count(v);
            else if (key == "N_f")
                s.N_f = to_count(v);
            else if (key == "K")
                s.K = to_count(v);
            else if (key == "snr_grid_db")
                s.snr_grid_db = to_grid(v);
            else if (key == "trials")
                s.trials = to_count(v);
            else if (key == "seed")
                s.seed = to_u64(v);
            else if (key == "estimator")
                s.estimator = to_enum<Estimator>(
                    v, {{"simple", Estimator::simple}, {"nls", Estimator::nls}, {"pcsi", Estimator::pcsi}});
            else if (key == "scheme")
                s.scheme = to_enum<Scheme>(v, {{"beamsync", Scheme::beamsync}, {"fgb", Scheme::fgb}});
            else if (key == "mode")
                s.mode = to_enum<SyncMode>(v, {{"phase", SyncMode::phase}, {"freq", SyncMode::freq}});
            else if (key == "lo_kind")
                s.lo_kind = to_enum<LoKind>(v, {{"ideal", LoKind::ideal}, {"lo1", LoKind::lo1}, {"lo2", LoKind::lo2}});
            else if (key == "gain_model")
                s.gain_model = to_enum<GainModel>(v, {{"unit_phase", GainModel::unit_phase}, {"cn", GainModel::cn}});
            else if (key == "sigma_eps2")
                s.sigma_eps2 = to_double(v);
            else if (key == "delta_range_hz")
            {
                const auto p = split(v, ',');
                if (p.size() != 2)
                    throw std::invalid_argument("expected 'low, high'");
                s.delta_range_hz = {to_double(p[0]), to_double(p[1])};
            }
            else if (key == "residual_delta_hz")
                s.residual_delta_hz = to_double(v);
            else if (key == "resync_period_min")
            {
                if (v == "none")
                    s.resync_period_min.reset();
                else
                    s.resync_period_min = to_double(v);
            }
            else if (key == "horizon_min")
                s.horizon_min = to_double(v);
            else if (key == "f_c")
                s.f_c = to_double(v);
            else if (key == "T")
                s.T = to_double(v);
        }
    }

    ParsedScenario parse_scenario_text(std::string_view text, const std::string &source, const Scenario &base)
    {
        ParsedScenario out{base, {}};
        Scenario &s = out.scenario;
        std::map<std::string, std::size_t> seen;

        std::size_t lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            const auto nl = text.find('\n', pos);
            std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++lineno;

            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;

            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ScenarioParseError(source, lineno, std::string(line), "expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            const std::string_view value = trim(line.substr(eq + 1));

            const auto &keys = scenario_keys();
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                throw ScenarioParseError(source, lineno, key, "unknown key");
            if (seen.count(key))
                throw ScenarioParseError(source, lineno, key,
                                         "duplicate key (first set on line " + std::to_string(seen[key]) + ")");
            seen[key] = lineno;
            try
            {
                assign(s, key, value);
            }
            catch (const std::invalid_argument &e)
            {
                throw ScenarioParseError(source, lineno, key, e.what());
            }
        }

        auto line_of = [&](const std::string &key) { return seen.count(key) ? seen.at(key) : std::size_t(0); };

        // Pilot lengths follow the antenna counts unless set explicitly
        auto raise = [&](std::size_t &len, const char *len_key, std::size_t M, const char *m_key)
        {
            if (len >= M)
                return;
            if (seen.count(len_key))
                throw ScenarioParseError(source, line_of(len_key), len_key,
                                         "must be >= " + std::string(m_key) + " = " + std::to_string(M));
            out.warnings.push_back(std::string(len_key) + " raised from " + std::to_string(len) + " to " +
                                   std::to_string(M) + " to satisfy " + len_key + " >= " + m_key);
            len = M;
        };
        raise(s.L, "L", s.M_A, "M_A");
        raise(s.L_B, "L_B", s.M_B, "M_B");

        try
        {
            validate(s);
        }
        catch (const ScenarioError &e)
        {
            throw ScenarioParseError(source, line_of(e.key()), e.key(), e.what());
        }
        return out;
    }

    ParsedScenario parse_scenario(const std::filesystem::path &path, const Scenario &base)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot read scenario file " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_scenario_text(ss.str(), path.string(), base);
    }

    std::string scenario_to_text(const Scenario &s)
    {
        std::ostringstream o;
        auto kv = [&o](const char *k, const std::string &v) { o << k << " = " << v << '\n'; };
        kv("M_A", std::to_string(s.M_A));
        kv("M_B", std::to_string(s.M_B));
        kv("L", std::to_string(s.L));
        kv("N", std::to_string(s.N));
        kv("L_B", std::to_string(s.L_B));
        kv("N_f", std::to_string(s.N_f));
        kv("K", std::to_string(s.K));
        std::string grid;
        for (std::size_t i = 0; i < s.snr_grid_db.size(); ++i)
            grid += (i ? ", " : "") + format_number(s.snr_grid_db[i]);
        kv("snr_grid_db", grid);
        kv("trials", std::to_string(s.trials));
        kv("seed", std::to_string(s.seed));
        kv("estimator", estimator_name(s.estimator));
        kv("scheme", scheme_name(s.scheme));
        kv("mode", mode_name(s.mode));
        kv("lo_kind", lo_name(s.lo_kind));
        kv("gain_model", gain_name(s.gain_model));
        kv("sigma_eps2", format_number(s.sigma_eps2));
        kv("delta_range_hz", format_number(s.delta_range_hz.first) + ", " + format_number(s.delta_range_hz.second));
        kv("residual_delta_hz", format_number(s.residual_delta_hz));
        kv("resync_period_min", s.resync_period_min ? format_number(*s.resync_period_min) : "none");
        kv("horizon_min", format_number(s.horizon_min));
        kv("f_c", format_number(s.f_c));
        kv("T", format_number(s.T));
        return o.str();
    }

    std::vector<std::string> preset_names() { return {"fig5", "fig6", "fig8", "fig11", "fig14", "fig9", "fig10"}; }

    Scenario preset(std::string_view name)
    {
        Scenario s;
        if (name == "fig5")
            return s;
        if (name == "fig6")
        {
            s.M_A = s.M_B = s.L = s.L_B = 32;
            return s;
        }
        if (name == "fig8")
        {
            s.N = 20;
            s.lo_kind = LoKind::lo1;
            return s;
        }
        if (name == "fig11")
        {
            s.mode = SyncMode::freq;
            return s;
        }
        if (name == "fig14")
        {
            s.M_A = s.M_B = s.L = s.L_B = 32;
            s.N = 32;
            s.residual_delta_hz = 1.0;
            return s;
        }
        if (name == "fig9" || name == "fig10")
        {
            s.N = 20;
            s.snr_grid_db = {20.0};
            s.trials = 2000;
            s.horizon_min = 250.0;
            if (name == "fig9")
                s.lo_kind = LoKind::lo2;
            else
                s.sigma_eps2 = kDriftReferenceVariance;
            return s;
        }
        throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
    }

    std::vector<std::string> subcommands()
    {
        return {"phase-rmse", "freq-rmse", "gain-timeline", "deviation-timeline", "crb", "budget", "schedule"};
    }

    std::string render_csv(std::string_view subcommand, const Scenario &input, unsigned workers)
    {
        Scenario s = input;
        if (subcommand == "phase-rmse" || subcommand == "gain-timeline" || subcommand == "deviation-timeline")
            s.mode = SyncMode::phase;
        else if (subcommand == "freq-rmse")
            s.mode = SyncMode::freq;
        else if (subcommand != "crb" && subcommand != "budget" && subcommand != "schedule")
            throw std::invalid_argument("unknown subcommand '" + std::string(subcommand) + "'");
        validate(s);

        std::ostringstream o;
        o << "# " << kVersion << '\n';
        o << "# command: " << subcommand << '\n';
        o << "# seed: " << s.seed << '\n';
        o << "# scenario:\n";
        std::istringstream lines(scenario_to_text(s));
        for (std::string line; std::getline(lines, line);)
            o << "#   " << line << '\n';

        if (subcommand == "phase-rmse" || subcommand == "freq-rmse")
        {
            o << "snr_db," << (s.mode == SyncMode::phase ? "rmse_rad" : "rmse_cycles") << ",trials,outliers\n";
            for (const auto &r : monte_carlo_rmse(s, workers).rows)
                o << format_number(r.x) << ',' << format_number(r.rmse) << ',' << r.trials << ',' << r.outliers
                  << '\n';
        }
        else if (subcommand == "gain-timeline")
        {
            o << "t_min,gain\n";
            for (const auto &p : beamforming_gain_timeline(s, workers))
                o << format_number(p.t_min) << ',' << format_number(p.gain) << '\n';
        }
        else if (subcommand == "deviation-timeline")
        {
            o << "t_min,mean_abs_dev_deg\n";
            for (const auto &p : phase_deviation_timeline(s, workers))
                o << format_number(p.t_min) << ',' << format_number(p.mean_abs_dev_deg) << '\n';
        }
        else if (subcommand == "crb")
        {
            std::set<std::size_t> nf = {2, 4, 8, 16, 32, 64, s.N_f};
            o << "n_f,snr_db,mean_crb,median_crb\n";
            for (const auto &r : crb_sweep(s, std::vector<std::size_t>(nf.begin(), nf.end())))
                o << r.N_f << ',' << format_number(r.snr_db) << ',' << format_number(r.mean_crb) << ','
                  << format_number(r.median_crb) << '\n';
        }
        else if (subcommand == "budget")
        {
            const auto b = measurement_budget(s.K, s.M_A, s.L, s.N);
            o << "scheme,measurements\n";
            o << "beamsync," << b.beamsync << '\n';
            o << "beamsweep," << b.beamsweep << '\n';
            o << "fgb," << b.fgb << '\n';
        }
        else
        {
            o << "index,kind,slave,start,length\n";
            const auto ev = multi_ap_schedule(s.K, s.mode, {s.L, s.N, s.L_B, s.N_f});
            for (std::size_t i = 0; i < ev.size(); ++i)
                o << i << ',' << to_string(ev[i].kind) << ',' << ev[i].slave << ',' << ev[i].start << ','
                  << ev[i].length << '\n';
        }
        return o.str();
    }

    int run_command(std::string_view subcommand, const Scenario &s, const std::filesystem::path &out_path,
                    unsigned workers, std::ostream *diagnostics)
    {
        std::ostream &err = diagnostics ? *diagnostics : std::cerr;
        const auto cmds = subcommands();
        if (std::find(cmds.begin(), cmds.end(), subcommand) == cmds.end())
        {
            err << "error: unknown subcommand '" << subcommand << "'\n";
            return 2;
        }
        std::string csv;
        try
        {
            csv = render_csv(subcommand, s, workers);
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << '\n';
            return 1;
        }
        if (out_path.empty() || out_path == "-")
        {
            std::cout << csv;
            return std::cout ? 0 : 1;
        }
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            err << "error: cannot open " << out_path.string() << " for writing\n";
            return 1;
        }
        out << csv;
        out.close();
        if (!out)
        {
            err << "error: write to " << out_path.string() << " failed\n";
            return 1;
        }
        return 0;
    }
}
