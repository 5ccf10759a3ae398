// SPDX-License-Identifier: Apache-2.0
//
// uavris: joint transmission, compression and trajectory design for
// wireless-powered crowdsensing with a UAV-mounted reflecting surface.
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

// Figure reproductions as CSV tables, a record of every optimisation behind them, and
// checks of the qualitative properties each figure is expected to show.

#pragma once

#include "bcd.hpp"
#include "csv.hpp"
#include "efficiency.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace uavris {

struct FigureOptions
{
    bool full = false;      // full-scale grids instead of desk-scale ones
    std::uint64_t seed = 1; // beam initialisation
    EfficiencySetup efficiency;
};

// One optimisation behind a figure.
struct RunRecord
{
    std::string label;
    Scheme scheme = Scheme::lossless;
    double objective = 0.0;
    int iterations = 0;
    BcdStatus status = BcdStatus::max_iterations;
    bool audit_passed = false;
    std::size_t violations = 0; // constraint violations through the link models at 1e-6
};

struct FigureData
{
    int id = 0;
    CsvTable table{{}};
    std::vector<RunRecord> runs;
};

struct PropertyCheck
{
    std::string name;
    bool passed = false;
    std::string detail;
};

inline CsvTable runs_table(const FigureData &f)
{
    CsvTable t({"label", "scheme", "objective_bits", "iterations", "status", "audit", "violations"});
    for (const auto &r : f.runs)
        t.add_row({r.label, std::string(to_string(r.scheme)), r.objective, static_cast<long long>(r.iterations),
                   std::string(to_string(r.status)), std::string(r.audit_passed ? "pass" : "fail"),
                   static_cast<long long>(r.violations)});
    return t;
}

namespace detail {

inline constexpr Scheme all_schemes[] = {Scheme::lossless, Scheme::lossy, Scheme::none};

inline FullSolution recorded_run(const Scenario &sc, Scheme scheme, const BcdOptions &opt, std::string label,
                                 std::vector<RunRecord> &runs)
{
    auto sol = optimize(sc, scheme, opt);
    runs.push_back({std::move(label), scheme, sol.objective, sol.iterations, sol.status, sol.audit.passed(),
                    check_solution(sc, sol, 1e-6).size()});
    return sol;
}

inline std::string fmt(const char *f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string to_label(const std::string &key, double v) { return key + "=" + fmt("%g", v); }

// Runs the schemes from fewest to most options, each continuing from the previous design.
// Every scheme's feasible set contains the previous one's, so continuation keeps the ordering
// of the optima that independent local searches can miss.
inline std::map<Scheme, FullSolution> nested_runs(const Scenario &sc, std::uint64_t seed, const std::string &label,
                                                  std::vector<RunRecord> &runs)
{
    std::map<Scheme, FullSolution> out;
    out[Scheme::none] = recorded_run(sc, Scheme::none, {seed, 1e-6, {}, {}}, label, runs);
    out[Scheme::lossy] =
        recorded_run(sc, Scheme::lossy, {seed, 1e-6, {}, design_start(out[Scheme::none])}, label + " from none", runs);
    out[Scheme::lossless] =
        recorded_run(sc, Scheme::lossless, {seed, 1e-6, {}, design_start(out[Scheme::lossy])}, label + " from lossy", runs);
    return out;
}

// Weight profiles contrasted in the trajectory figure.
inline std::vector<std::pair<std::string, std::vector<double>>> weight_profiles(const Scenario &sc)
{
    return {{"equal", std::vector<double>(static_cast<std::size_t>(sc.K), 1.0 / sc.K)}, {"different", sc.lambda}};
}

} // namespace detail

// Efficiency of direct uploading and compression versus power.
inline FigureData figure2(const Scenario &sc, const FigureOptions &o)
{
    FigureData f;
    f.id = 2;
    f.table = efficiency_analysis(sc, o.efficiency).curves;
    return f;
}

// Trajectories per scheme under equal and default weights.
inline FigureData figure3(const Scenario &base, const FigureOptions &o)
{
    FigureData f;
    f.id = 3;
    f.table = CsvTable({"profile", "scheme", "t", "x", "y", "z"});
    for (const auto &[profile, weights] : detail::weight_profiles(base))
    {
        Scenario sc = base;
        sc.lambda = weights;
        for (Scheme scheme : detail::all_schemes)
        {
            const auto sol = detail::recorded_run(sc, scheme, {o.seed, 1e-6, {}, {}}, profile, f.runs);
            for (std::size_t t = 0; t < sol.trajectory.q.size(); ++t)
            {
                const Vec3 &q = sol.trajectory.q[t];
                f.table.add_row({profile, std::string(to_string(scheme)), static_cast<long long>(t), q.x(), q.y(), q.z()});
            }
        }
    }
    return f;
}

// WPT and upload time fractions per slot and UE, lossless scheme.
inline FigureData figure4(const Scenario &base, const FigureOptions &o)
{
    FigureData f;
    f.id = 4;
    f.table = CsvTable({"profile", "t", "k", "a", "b"});
    for (const auto &[profile, weights] : detail::weight_profiles(base))
    {
        Scenario sc = base;
        sc.lambda = weights;
        const auto sol = detail::recorded_run(sc, Scheme::lossless, {o.seed, 1e-6, {}, {}}, profile, f.runs);
        for (int t = 0; t < sc.T; ++t)
            for (int k = 0; k < sc.K; ++k)
                f.table.add_row({profile, static_cast<long long>(t), static_cast<long long>(k), sol.schedule.a(k, t),
                                 sol.schedule.b(k, t)});
    }
    return f;
}

// Weighted raw bits versus transmit power for two surface sizes; schemes run nested.
inline FigureData figure5(const Scenario &base, const FigureOptions &o)
{
    FigureData f;
    f.id = 5;
    f.table = CsvTable({"N", "P_T_dBm", "scheme", "objective_bits", "iterations", "status"});
    const std::vector<int> sizes = o.full ? std::vector<int>{16, 128} : std::vector<int>{16, 64};
    const std::vector<double> powers = o.full ? std::vector<double>{20, 22.5, 25, 27.5, 30, 32.5, 35, 37.5, 40}
                                              : std::vector<double>{20, 25, 30, 35, 40};
    for (int N : sizes)
        for (double dbm : powers)
        {
            Scenario sc = base;
            sc.N = N;
            sc.P_T = dbm_to_watts(dbm);
            const auto sols = detail::nested_runs(sc, o.seed, detail::to_label("N", N) + " " + detail::to_label("P_T_dBm", dbm), f.runs);
            for (Scheme scheme : detail::all_schemes)
            {
                const auto &sol = sols.at(scheme);
                f.table.add_row({static_cast<long long>(N), dbm, std::string(to_string(scheme)), sol.objective,
                                 static_cast<long long>(sol.iterations), std::string(to_string(sol.status))});
            }
        }
    return f;
}

// Weighted raw bits versus surface size for two antenna counts; schemes run nested.
inline FigureData figure6(const Scenario &base, const FigureOptions &o)
{
    FigureData f;
    f.id = 6;
    f.table = CsvTable({"M", "N", "scheme", "objective_bits", "iterations", "status"});
    const std::vector<int> sizes = o.full ? std::vector<int>{16, 32, 64, 96, 128} : std::vector<int>{16, 32, 64};
    for (int M : {4, 32})
        for (int N : sizes)
        {
            Scenario sc = base;
            sc.M = M;
            sc.N = N;
            const auto sols = detail::nested_runs(sc, o.seed, detail::to_label("M", M) + " " + detail::to_label("N", N), f.runs);
            for (Scheme scheme : detail::all_schemes)
            {
                const auto &sol = sols.at(scheme);
                f.table.add_row({static_cast<long long>(M), static_cast<long long>(N), std::string(to_string(scheme)),
                                 sol.objective, static_cast<long long>(sol.iterations), std::string(to_string(sol.status))});
            }
        }
    return f;
}

// Share of compressed bits in each UE's uploaded bits versus the reference channel gain,
// UAV hovering above the BS at the flight altitude for the whole horizon. Each UE is solved
// alone: with shared slots the optimum serves one pair of UEs and leaves the other at zero,
// whereas alone every UE reveals how much it compresses given its own path loss. The solver
// tolerance is tightened because compression is a small share of the objective.
inline FigureData figure7(const Scenario &base, const FigureOptions &o)
{
    FigureData f;
    f.id = 7;
    f.table = CsvTable({"h0_dB", "scheme", "k", "proportion", "compressed_bits", "uploaded_bits"});
    const std::vector<double> gains =
        o.full ? std::vector<double>{-60, -57.5, -55, -52.5, -50, -47.5, -45, -42.5, -40} : std::vector<double>{-60, -55, -50, -45, -40};
    for (Scheme scheme : {Scheme::lossless, Scheme::lossy})
        for (double h0 : gains)
            for (int k = 0; k < base.K; ++k)
            {
                const auto uk = static_cast<std::size_t>(k);
                Scenario sc = base;
                sc.K = 1;
                sc.q = {base.q[uk]};
                sc.lambda = {1.0};
                sc.kappa = {base.kappa[uk]};
                sc.kappa_bar = {base.kappa_bar[uk]};
                sc.h0 = db_to_linear(h0);
                sc.tol_solver = std::min(sc.tol_solver, 1e-10);
                // the hover is the whole flight, so it is also the start and end point
                sc.q1 = sc.qT = sc.at_altitude(sc.q0.x(), sc.q0.y());
                BcdOptions opt{o.seed, 1e-6, Trajectory{std::vector<Vec3>(static_cast<std::size_t>(sc.T), sc.q1)}, {}};
                const auto sol = detail::recorded_run(sc, scheme, opt,
                                                      detail::to_label("h0_dB", h0) + " UE" + std::to_string(k + 1), f.runs);
                const auto g = slot_gains(sc, sol.channels, sol.plan);
                const auto cm = compression_model(sc, scheme, 0);
                double up = 0.0, comp = 0.0;
                for (int t = 0; t < sc.T; ++t)
                {
                    up += rate_bits(sc, g.upload(0, t), sol.schedule.b(0, t), sol.schedule.P(0, t));
                    comp += cm.uploaded_bits_per_f * sol.schedule.f(0, t);
                }
                f.table.add_row({h0, std::string(to_string(scheme)), static_cast<long long>(k), up > 0 ? comp / up : 0.0, comp, up});
            }
    return f;
}

// Objective after each BCD iteration on the base scenario.
inline FigureData figure8(const Scenario &base, const FigureOptions &o)
{
    FigureData f;
    f.id = 8;
    f.table = CsvTable({"scheme", "iteration", "objective_bits", "relative_change"});
    for (Scheme scheme : detail::all_schemes)
    {
        const auto sol = detail::recorded_run(base, scheme, {o.seed, 1e-6, {}, {}}, "base", f.runs);
        double prev = 0.0;
        for (std::size_t i = 0; i < sol.objective_history.size(); ++i)
        {
            const double v = sol.objective_history[i];
            f.table.add_row({std::string(to_string(scheme)), static_cast<long long>(i + 1), v, detail::relative_change(v, prev)});
            prev = v;
        }
    }
    return f;
}

inline FigureData figure(int id, const Scenario &sc, const FigureOptions &o)
{
    switch (id)
    {
    case 2: return figure2(sc, o);
    case 3: return figure3(sc, o);
    case 4: return figure4(sc, o);
    case 5: return figure5(sc, o);
    case 6: return figure6(sc, o);
    case 7: return figure7(sc, o);
    case 8: return figure8(sc, o);
    }
    throw std::invalid_argument("figure id must be 2..8");
}

// ---- property checks on the emitted tables ---------------------------------

namespace detail {

inline std::string cell_text(const CsvTable &t, std::size_t r, const std::string &col)
{
    const auto &c = t.row(r).at(t.index_of(col));
    if (const auto *s = std::get_if<std::string>(&c)) return *s;
    return fmt("%.17g", t.number(r, col));
}

// Checks that `value` does not decrease along `axis` within each group of `keys`.
inline PropertyCheck nondecreasing(const CsvTable &t, const std::vector<std::string> &keys, const std::string &axis,
                                   const std::string &value, double tol, std::string name)
{
    std::map<std::string, std::vector<std::pair<double, double>>> groups;
    for (std::size_t r = 0; r < t.rows(); ++r)
    {
        std::string key;
        for (const auto &k : keys) key += k + "=" + cell_text(t, r, k) + " ";
        groups[key].push_back({t.number(r, axis), t.number(r, value)});
    }
    PropertyCheck c{std::move(name), true, ""};
    double worst = 0.0;
    for (auto &[key, pts] : groups)
    {
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 1; i < pts.size(); ++i)
        {
            const double drop = (pts[i - 1].second - pts[i].second) / std::max(std::abs(pts[i - 1].second), 1e-300);
            worst = std::max(worst, drop);
            if (drop > tol)
            {
                c.passed = false;
                c.detail += key + "drops at " + axis + "=" + fmt("%g", pts[i].first) + "; ";
            }
        }
    }
    if (c.passed) c.detail = "largest relative drop " + fmt("%.3g", worst);
    return c;
}

} // namespace detail

// Every optimisation behind a figure passed the stage-wise audit and the feasibility check.
inline PropertyCheck runs_check(const FigureData &f)
{
    PropertyCheck c{"figure " + std::to_string(f.id) + " runs: audit and feasibility", true, ""};
    for (const auto &r : f.runs)
        if (!r.audit_passed || r.violations > 0)
        {
            c.passed = false;
            c.detail += r.label + " " + to_string(r.scheme) + "; ";
        }
    if (c.passed) c.detail = std::to_string(f.runs.size()) + " runs";
    return c;
}

inline std::vector<PropertyCheck> figure_properties(const FigureData &f, const Scenario &sc)
{
    std::vector<PropertyCheck> out;
    const auto &t = f.table;
    if (f.id == 2)
    {
        PropertyCheck c{"figure 2: upload efficiency crosses both compression curves", false, ""};
        int lossless = 0, lossy = 0;
        for (std::size_t r = 1; r < t.rows(); ++r)
        {
            auto side = [&](std::size_t i, const char *col) { return t.number(i, "eta_U") > t.number(i, col); };
            lossless += side(r, "eta_C_lossless") != side(r - 1, "eta_C_lossless");
            lossy += side(r, "eta_C_lossy") != side(r - 1, "eta_C_lossy");
        }
        c.passed = lossless == 1 && lossy == 1;
        c.detail = "crossings lossless " + std::to_string(lossless) + " lossy " + std::to_string(lossy);
        out.push_back(c);
        return out;
    }
    out.push_back(runs_check(f));
    if (f.id == 3)
    {
        // mirrored slot pairs of the equal-weight trajectories straddle x = 0
        for (Scheme scheme : detail::all_schemes)
        {
            std::vector<double> x;
            for (std::size_t r = 0; r < t.rows(); ++r)
                if (detail::cell_text(t, r, "profile") == "equal" && detail::cell_text(t, r, "scheme") == to_string(scheme))
                    x.push_back(t.number(r, "x"));
            double mean = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) mean += std::abs(x[i] + x[x.size() - 1 - i]);
            mean /= static_cast<double>(x.size());
            const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
            const double span = *hi - *lo;
            out.push_back({std::string("figure 3: equal-weight ") + to_string(scheme) + " trajectory is x-symmetric",
                           mean <= 0.2 * span, "mean |x(t)+x(T+1-t)| " + detail::fmt("%.4g", mean) + " span " + detail::fmt("%.4g", span)});
        }
    }
    if (f.id == 4)
    {
        std::map<std::string, std::vector<std::pair<double, double>>> sums; // profile -> per UE (sum a, sum b)
        for (std::size_t r = 0; r < t.rows(); ++r)
        {
            auto &v = sums[detail::cell_text(t, r, "profile")];
            const auto k = static_cast<std::size_t>(t.number(r, "k"));
            if (v.size() <= k) v.resize(k + 1);
            v[k].first += t.number(r, "a");
            v[k].second += t.number(r, "b");
        }
        PropertyCheck c{"figure 4: every UE harvests longer than it uploads", true, ""};
        for (const auto &[profile, v] : sums)
            for (std::size_t k = 0; k < v.size(); ++k)
            {
                c.detail += profile + " UE" + std::to_string(k + 1) + " " + detail::fmt("%.4g", v[k].first) + ">=" +
                            detail::fmt("%.4g", v[k].second) + "; ";
                c.passed = c.passed && v[k].first >= v[k].second;
            }
        out.push_back(c);
    }
    if (f.id == 5)
    {
        out.push_back(detail::nondecreasing(t, {"N", "scheme"}, "P_T_dBm", "objective_bits", 1e-6,
                                            "figure 5: objective nondecreasing in transmit power"));
        out.push_back(detail::nondecreasing(t, {"P_T_dBm", "scheme"}, "N", "objective_bits", 1e-6,
                                            "figure 5: objective nondecreasing in surface size"));
    }
    if (f.id == 6)
        out.push_back(detail::nondecreasing(t, {"M", "scheme"}, "N", "objective_bits", 1e-6,
                                            "figure 6: objective nondecreasing in surface size"));
    if (f.id == 7)
    {
        // proportions indexed by (scheme, h0, k)
        std::map<std::pair<std::string, double>, std::vector<double>> p;
        for (std::size_t r = 0; r < t.rows(); ++r)
        {
            auto &v = p[{detail::cell_text(t, r, "scheme"), t.number(r, "h0_dB")}];
            const auto k = static_cast<std::size_t>(t.number(r, "k"));
            if (v.size() <= k) v.resize(k + 1);
            v[k] = t.number(r, "proportion");
        }
        CsvTable decreasing({"scheme", "k", "h0_dB", "proportion"});
        for (std::size_t r = 0; r < t.rows(); ++r)
            decreasing.add_row({detail::cell_text(t, r, "scheme"), t.number(r, "k"), -t.number(r, "h0_dB"), t.number(r, "proportion")});
        out.push_back(detail::nondecreasing(decreasing, {"scheme", "k"}, "h0_dB", "proportion", 1e-6,
                                            "figure 7: proportions nonincreasing in channel gain"));

        PropertyCheck order{"figure 7: lossless proportion >= lossy", true, ""};
        PropertyCheck sym{"figure 7: mirrored UEs have equal proportions, far UEs compress more", true, ""};
        constexpr double rel = 1e-3;
        double worst_pair = 0.0;
        for (const auto &[key, v] : p)
        {
            if (key.first == "lossless")
            {
                const auto it = p.find({"lossy", key.second});
                if (it != p.end())
                    for (std::size_t k = 0; k < v.size() && k < it->second.size(); ++k)
                        if (v[k] < it->second[k] * (1 - 1e-6))
                        {
                            order.passed = false;
                            order.detail += "h0=" + detail::fmt("%g", key.second) + " UE" + std::to_string(k + 1) + "; ";
                        }
            }
            if (v.size() != 4 || sc.K != 4) continue;
            auto gap = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
            worst_pair = std::max({worst_pair, gap(v[0], v[3]), gap(v[1], v[2])});
            const bool ok = gap(v[0], v[3]) <= rel && gap(v[1], v[2]) <= rel && std::min(v[0], v[3]) >= std::max(v[1], v[2]);
            if (!ok)
            {
                sym.passed = false;
                sym.detail += key.first + " h0=" + detail::fmt("%g", key.second) + "; ";
            }
        }
        if (sc.K != 4)
        {
            sym.passed = false;
            sym.detail = "needs the four-UE layout";
        }
        else if (sym.passed)
            sym.detail = "largest mirrored-pair gap " + detail::fmt("%.3g", worst_pair);
        if (order.passed) order.detail = "all gains and UEs";
        out.push_back(order);
        out.push_back(sym);
    }
    if (f.id == 8)
    {
        PropertyCheck c{"figure 8: relative change below 1e-3 by iteration 10", true, ""};
        std::map<std::string, std::pair<int, double>> last;
        for (std::size_t r = 0; r < t.rows(); ++r)
        {
            const auto s = detail::cell_text(t, r, "scheme");
            const int it = static_cast<int>(t.number(r, "iteration"));
            if (it <= 10 && it > 1) last[s] = {it, std::min(last.count(s) ? last[s].second : 1.0, t.number(r, "relative_change"))};
        }
        for (Scheme scheme : detail::all_schemes)
        {
            const auto it = last.find(to_string(scheme));
            const bool ok = it != last.end() && it->second.second < 1e-3;
            c.passed = c.passed && ok;
            c.detail += std::string(to_string(scheme)) + " " + (it == last.end() ? "no iterations" : detail::fmt("%.3g", it->second.second)) + "; ";
        }
        out.push_back(c);
    }
    return out;
}

} // namespace uavris
