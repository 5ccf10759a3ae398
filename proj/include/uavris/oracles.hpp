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

// Brute-force references for small instances: grid search over single-UE resource
// programs, Monte-Carlo beam comparisons and an exhaustive two-element phase grid.

#pragma once

#include "beamforming.hpp"
#include "resource.hpp"
#include "trajectory.hpp"

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace uavris {

struct OracleCheck
{
    std::string name;
    bool passed = false;
    std::string detail;
};

// Maximises f over [0,1]^d: a full grid with `first` points per axis, then `levels`
// refinements with `fine` points on a window of two coarse steps around the incumbent.
inline double zoom_grid_max(int d, int first, int fine, int levels, const std::function<double(const std::vector<double> &)> &f,
                            std::vector<double> *argmax = nullptr)
{
    std::vector<double> lo(static_cast<std::size_t>(d), 0.0), hi(static_cast<std::size_t>(d), 1.0);
    std::vector<double> best_s(static_cast<std::size_t>(d), 0.0), s(static_cast<std::size_t>(d));
    double best = f(best_s);
    for (int level = 0; level <= levels; ++level)
    {
        const int n = level == 0 ? first : fine;
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        for (;;)
        {
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (n - 1);
            const double v = f(s);
            if (v > best)
            {
                best = v;
                best_s = s;
            }
            std::size_t j = 0;
            while (j < idx.size() && ++idx[j] == n) idx[j++] = 0;
            if (j == idx.size()) break;
        }
        for (std::size_t i = 0; i < s.size(); ++i)
        {
            const double step = (hi[i] - lo[i]) / (n - 1);
            lo[i] = std::max(0.0, best_s[i] - 2 * step);
            hi[i] = std::min(1.0, best_s[i] + 2 * step);
        }
    }
    if (argmax) *argmax = best_s;
    return best;
}

// Single-UE resource optimum by grid search. Coordinates are fractions of what the
// remaining energy and upload credit allow, so every grid point is feasible. The WPT
// share takes whatever the upload share leaves of the slot.
inline double resource_grid_optimum(const Scenario &sc, const SlotGains &g, Scheme scheme, int first, int fine, int levels)
{
    const int T = static_cast<int>(g.harvest.cols());
    const auto cm = compression_model(sc, scheme, 0);
    const double dt = sc.delta_t, comp = sc.gamma * dt * sc.gamma_c, lam = sc.lambda[0];
    const double up_max = std::min(1.0, 1.0 - sc.gamma);
    // per slot: upload share, power fraction and compression fraction; the last slot compresses all it can
    const int d = T == 1 ? 3 : 3 * T - 1;
    auto eval = [&](const std::vector<double> &s) {
        double energy = 0.0, credit = 0.0, total = 0.0;
        std::size_t j = 0;
        for (int t = 0; t < T; ++t)
        {
            const double b = up_max * s[j++];
            const double a = 1.0 - b;
            energy += g.harvest(0, t) * a;
            const double p = s[j++] * energy / dt;
            energy = std::max(0.0, energy - dt * p);
            const double R = rate_bits_perspective(sc, g.upload(0, t), b, p);
            credit += R;
            total += lam * R;
            if (!cm.enabled) continue;
            double f = std::min(std::cbrt(energy / comp), credit / cm.uploaded_bits_per_f);
            if (t + 1 < T || T == 1) f *= s[j++];
            energy = std::max(0.0, energy - comp * f * f * f);
            credit = std::max(0.0, credit - cm.uploaded_bits_per_f * f);
            total += lam * cm.saved_bits_per_f * f;
        }
        return total;
    };
    const int dims = cm.enabled ? d : 2 * T;
    return zoom_grid_max(dims, first, fine, levels, eval);
}

// Resource-program optimum versus grid search for a single UE with T slots.
inline OracleCheck resource_oracle(const Scenario &base, int T, Scheme scheme, int first, int fine, int levels,
                                   std::uint64_t seed = 1)
{
    Scenario sc = base;
    sc.K = 1;
    sc.T = T;
    sc.lambda = {1.0};
    sc.q = {Vec3(-10.0, 0.0, 0.0)};
    sc.kappa = {base.kappa.empty() ? 0.5 : base.kappa[0]};
    sc.kappa_bar = {base.kappa_bar.empty() ? 0.5 : base.kappa_bar[0]};
    Trajectory Q;
    for (int t = 0; t < T; ++t) Q.q.push_back(sc.at_altitude(-6.0 + 3.0 * t, 1.0));
    const auto ch = assemble_channels(sc, Q);
    const auto plan = random_plan(sc, ch, seed);
    const auto rp = build_resource_program(sc, ch, plan, scheme);
    const auto res = solve_resources(rp, sc);
    const double grid = resource_grid_optimum(sc, rp.gains, scheme, first, fine, levels);
    const double rel = std::abs(res.solution.objective - grid) / std::max(std::abs(grid), 1e-300);
    char buf[256];
    std::snprintf(buf, sizeof buf, "solver %.9g grid %.9g rel %.3g", res.solution.objective, grid, rel);
    return {"resource K=1 T=" + std::to_string(T) + " " + to_string(scheme) + " scale " +
                std::to_string(static_cast<long long>(sc.cycle_unit_scale)),
            rel <= 1e-3, buf};
}

namespace detail {

// Random array sizes and a random non-degenerate layout for two slots at one UAV position.
inline ChannelState random_layout(std::mt19937_64 &rng, Scenario &sc)
{
    std::uniform_real_distribution<double> pos(-15, 15);
    std::uniform_int_distribution<int> size(2, 12);
    sc.T = 2;
    sc.M = size(rng);
    sc.N = size(rng);
    for (;;)
    {
        for (auto &q : sc.q) q = Vec3(pos(rng), pos(rng), 0.0);
        const Vec3 uav = sc.at_altitude(pos(rng), pos(rng));
        try
        {
            return assemble_channels(sc, Trajectory{{uav, uav}});
        }
        catch (const GeometryError &)
        {
        }
    }
}

inline CVec random_unit(std::mt19937_64 &rng, int M)
{
    std::normal_distribution<double> nd;
    CVec v(M);
    for (int m = 0; m < M; ++m) v[m] = cd(nd(rng), nd(rng));
    return v / v.norm();
}

} // namespace detail

// Closed-form beams and aligned phases against random alternatives on random layouts.
inline OracleCheck beam_oracle(std::uint64_t seed, int instances, int samples)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    int failures = 0;
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst)
    {
        Scenario sc;
        const auto ch = detail::random_layout(rng, sc);
        const int k = inst % sc.K;
        auto x = ResourceSchedule::zeros(sc.K, sc.T);
        x.a.setConstant(0.1);
        x.b.setConstant(0.1);
        x.P.setConstant(0.01);
        Scenario tight = sc;
        tight.j_max = 200;
        tight.tol_solver = 1e-13;
        const auto plan = alternating_beamforming(tight, ch, x, random_plan(sc, ch, seed + inst)).plan;
        const auto i = plan.kt(k, 0);
        const double gw = std::norm(ch.effective(k, 0, plan.theta[i]).dot(plan.w[i]));
        const double gu = std::norm(ch.effective(k, 0, plan.theta_bar[i]).dot(plan.u[i]));
        for (int s = 0; s < samples; ++s)
        {
            const CVec r = detail::random_unit(rng, sc.M);
            Eigen::VectorXd th(sc.N);
            for (int n = 0; n < sc.N; ++n) th[n] = ph(rng);
            const double e = std::norm(ch.effective(k, 0, th).dot(r));
            const double ratio = std::max(sc.P_T * e / gw, e / gu);
            worst = std::max(worst, ratio);
            if (ratio > 1 + 1e-9) ++failures;
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d instances x %d samples, best random/closed-form %.6f", instances, samples, worst);
    return {"beams vs random alternatives", failures == 0, buf};
}

// Exhaustive grid over both phases of a two-element surface against the aligned phases.
inline OracleCheck phase_grid_oracle(std::uint64_t seed, int steps)
{
    std::mt19937_64 rng(seed);
    Scenario sc;
    sc.T = 2;
    sc.N = 2;
    sc.M = 4;
    const Vec3 uav = sc.at_altitude(-3.0, 6.0);
    const auto ch = assemble_channels(sc, Trajectory{{uav, uav}});
    std::normal_distribution<double> nd;
    CVec v(sc.M);
    for (int m = 0; m < sc.M; ++m) v[m] = cd(nd(rng), nd(rng));
    v /= v.norm();
    const int k = 0;
    const double aligned = std::abs(ch.effective(k, 0, ris_phases(ch, v, k, 0, true)).dot(v));
    const cd direct = ch.h[k].dot(v);
    cd path[2];
    for (int n = 0; n < 2; ++n) path[n] = std::conj(ch.g_of(k, 0)[n]) * ch.G_UR[0].col(n).dot(v);
    const double h = 2.0 * std::numbers::pi / (steps - 1);
    double best = 0.0;
    for (int i = 0; i < steps; ++i)
    {
        const cd r0 = direct + std::polar(1.0, -std::numbers::pi + i * h) * path[0];
        for (int j = 0; j < steps; ++j) best = std::max(best, std::abs(r0 + std::polar(1.0, -std::numbers::pi + j * h) * path[1]));
    }
    const double resolution = (std::abs(path[0]) + std::abs(path[1])) * h / 2;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%dx%d grid best %.9g aligned %.9g resolution %.3g", steps, steps, best, aligned, resolution);
    return {"two-element phase grid", best <= aligned * (1 + 1e-9) && best >= aligned - resolution, buf};
}

// Aligned phases reach |h^H v| + sum_n |g_n| |g_UR,n^H v| on random layouts and beams.
inline OracleCheck aligned_magnitude_oracle(std::uint64_t seed, int instances)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst)
    {
        Scenario sc;
        const auto ch = detail::random_layout(rng, sc);
        const int k = inst % sc.K;
        const CVec v = detail::random_unit(rng, sc.M);
        const double aligned = std::abs(ch.effective(k, 0, ris_phases(ch, v, k, 0, true)).dot(v));
        const double ceiling = composite_ceiling(ch, v, k, 0);
        worst = std::max(worst, std::abs(aligned - ceiling) / ceiling);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d instances, largest relative gap %.3g", instances, worst);
    return {"aligned composite magnitude", worst <= 1e-9, buf};
}

// Linearised rate and energy on a solved design: exact at the expansion point through the
// link models, and the energy bound below the aligned energy at perturbed positions.
inline std::vector<OracleCheck> taylor_oracle(const Scenario &sc, std::uint64_t seed, int perturbations)
{
    const auto Q = initial_trajectory(sc);
    const auto ch = assemble_channels(sc, Q);
    auto plan = random_plan(sc, ch, seed);
    auto X = solve_resources(build_resource_program(sc, ch, plan, Scheme::lossless), sc).schedule;
    plan = alternating_beamforming(sc, ch, X, plan).plan;
    X = solve_resources(build_resource_program(sc, ch, plan, Scheme::lossless), sc).schedule;

    const auto point = slack_point(sc, ch);
    const auto tb = trajectory_bounds(sc, ch, plan, X, point);
    auto gap = [](double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
    double worst_rate = 0.0, worst_energy = 0.0;
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            const double R = plan.active_upload[i] ? uplink_bits(sc, ch, plan.u[i], plan.theta_bar[i], k, t, X.b(k, t), X.P(k, t)) : 0.0;
            const double E = plan.active_wpt[i] ? harvested_energy(sc, ch, plan.w[i], plan.theta[i], k, t, X.a(k, t)) : 0.0;
            worst_rate = std::max(worst_rate, gap(tb.rate[i].value, R));
            worst_energy = std::max(worst_energy, gap(tb.energy[i].value, E));
        }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);
    std::uniform_int_distribution<int> slot(0, sc.T - 1), ue(0, sc.K - 1);
    int active = 0, below = 0;
    double worst_excess = 0.0;
    for (int s = 0; s < perturbations; ++s)
    {
        const int t = slot(rng), k = ue(rng);
        const auto i = plan.kt(k, t);
        if (!plan.active_wpt[i]) continue;
        ++active;
        const Vec3 q = Q.q[static_cast<std::size_t>(t)] + Vec3(shift(rng), shift(rng), 0.0);
        const double x = std::pow((q - sc.q[static_cast<std::size_t>(k)]).norm(), sc.alpha_RU);
        const double y = std::pow((q - sc.q0).norm(), sc.alpha_BR);
        const double E = aligned_energy_slack(sc, trajectory_coefficients(ch, plan, k, t), x, y, X.a(k, t));
        const double excess = (tb.energy[i](x, y) - E) / std::max(E, 1e-300);
        worst_excess = std::max(worst_excess, excess);
        below += excess <= 1e-12;
    }
    char buf[3][160];
    std::snprintf(buf[0], sizeof buf[0], "largest relative gap %.3g over %d links", worst_rate, sc.K * sc.T);
    std::snprintf(buf[1], sizeof buf[1], "largest relative gap %.3g over %d links", worst_energy, sc.K * sc.T);
    std::snprintf(buf[2], sizeof buf[2], "%d of %d active samples below, largest relative excess %.3g", below, active,
                  worst_excess);
    return {{"linearised rate exact at the expansion point", worst_rate <= 1e-9, buf[0]},
            {"linearised energy exact at the expansion point", worst_energy <= 1e-9, buf[1]},
            {"linearised energy is a lower bound", active > 0 && below == active, buf[2]}};
}

// All oracles; `small` uses reduced grids.
inline std::vector<OracleCheck> run_oracles(const Scenario &base, std::uint64_t seed, bool small)
{
    std::vector<OracleCheck> out;
    for (double scale : {1.0, 1e3})
    {
        Scenario sc = base;
        sc.cycle_unit_scale = scale;
        out.push_back(resource_oracle(sc, 1, Scheme::lossless, small ? 60 : 200, 21, small ? 4 : 6, seed));
        out.push_back(resource_oracle(sc, 1, Scheme::lossy, small ? 60 : 200, 21, small ? 4 : 6, seed));
        out.push_back(resource_oracle(sc, 2, Scheme::lossless, small ? 9 : 16, 9, small ? 8 : 12, seed));
    }
    out.push_back(beam_oracle(seed, small ? 5 : 20, 1000));
    out.push_back(phase_grid_oracle(seed, 721));
    out.push_back(aligned_magnitude_oracle(seed, 100));
    for (auto &c : taylor_oracle(base, seed, small ? 200 : 1000)) out.push_back(std::move(c));
    return out;
}

} // namespace uavris
