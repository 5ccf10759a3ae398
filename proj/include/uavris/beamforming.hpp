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

#pragma once

#include "channel.hpp"
#include "link.hpp"
#include "scenario.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace uavris {

class DegenerateChannelError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// BS beams and RIS phases for every (k, t), index k*T + t.
struct BeamformingPlan
{
    int K = 0, T = 0;
    std::vector<CVec> w;                 // transmit beam, |w|^2 = P_T when active
    std::vector<CVec> u;                 // receive combiner, |u| = 1 when active
    std::vector<Eigen::VectorXd> theta;     // WPT phases, identity when unused
    std::vector<Eigen::VectorXd> theta_bar; // upload phases, identity when unused
    std::vector<char> active_wpt, active_upload;

    std::size_t kt(int k, int t) const { return static_cast<std::size_t>(k) * T + t; }

    static BeamformingPlan empty(int K, int T, int M, int N)
    {
        BeamformingPlan p;
        p.K = K;
        p.T = T;
        const auto n = static_cast<std::size_t>(K) * T;
        p.w.assign(n, CVec::Zero(M));
        p.u.assign(n, CVec::Zero(M));
        p.theta.assign(n, Eigen::VectorXd::Zero(N));
        p.theta_bar.assign(n, Eigen::VectorXd::Zero(N));
        p.active_wpt.assign(n, 0);
        p.active_upload.assign(n, 0);
        return p;
    }
};

inline CVec mrt_transmit(const Scenario &sc, const ChannelState &ch, const Eigen::VectorXd &theta, int k, int t,
                         bool active)
{
    if (!active) return CVec::Zero(ch.M);
    CVec v = ch.effective(k, t, theta);
    const double n = v.norm();
    if (!(n > 0)) throw DegenerateChannelError("zero effective channel, transmit beam undefined");
    return std::sqrt(sc.P_T) * v / n;
}

inline CVec mrc_receive(const ChannelState &ch, const Eigen::VectorXd &theta_bar, int k, int t, bool active)
{
    if (!active) return CVec::Zero(ch.M);
    CVec v = ch.effective(k, t, theta_bar);
    const double n = v.norm();
    if (!(n > 0)) throw DegenerateChannelError("zero effective channel, receive combiner undefined");
    return v / n;
}

// Rotates every reflected path onto the phase of the direct path for beam v.
inline Eigen::VectorXd ris_phases(const ChannelState &ch, const CVec &v, int k, int t, bool active)
{
    Eigen::VectorXd th = Eigen::VectorXd::Zero(ch.N);
    if (!active) return th;
    const cd direct = ch.h[k].dot(v);
    const double ref = std::abs(direct) > 0 ? std::arg(direct) : 0.0;
    const CVec &g = ch.g_of(k, t);
    const CMat &G = ch.G_UR[t];
    for (int n = 0; n < ch.N; ++n)
    {
        const cd via_ris = G.col(n).dot(v);
        th[n] = std::remainder(ref - std::arg(via_ris) + std::arg(g[n]), 2.0 * std::numbers::pi);
    }
    return th;
}

inline Eigen::VectorXd ris_phases_wpt(const ChannelState &ch, const CVec &w, int k, int t, bool active)
{
    return ris_phases(ch, w, k, t, active);
}

inline Eigen::VectorXd ris_phases_upload(const ChannelState &ch, const CVec &u, int k, int t, bool active)
{
    return ris_phases(ch, u, k, t, active);
}

// |h^H v| + sum_n |g_n| |g_UR,n^H v|, the largest composite magnitude any phase choice can reach.
inline double composite_ceiling(const ChannelState &ch, const CVec &v, int k, int t)
{
    double s = std::abs(ch.h[k].dot(v));
    const CVec &g = ch.g_of(k, t);
    for (int n = 0; n < ch.N; ++n) s += std::abs(g[n]) * std::abs(ch.G_UR[t].col(n).dot(v));
    return s;
}

inline LinkCoefficients trajectory_coefficients(const ChannelState &ch, const BeamformingPlan &plan, int k, int t)
{
    const auto i = plan.kt(k, t);
    return link_coefficients(ch, k, t, plan.w[i], plan.u[i], plan.theta[i], plan.theta_bar[i]);
}

// Seeded random beams scaled to the budget, with phases aligned to them.
inline BeamformingPlan random_plan(const Scenario &sc, const ChannelState &ch, std::uint64_t seed)
{
    auto plan = BeamformingPlan::empty(sc.K, sc.T, sc.M, sc.N);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto draw = [&] {
        CVec v(sc.M);
        for (int m = 0; m < sc.M; ++m) v[m] = cd(nd(rng), nd(rng));
        return CVec(v / v.norm());
    };
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            plan.w[i] = std::sqrt(sc.P_T) * draw();
            plan.u[i] = draw();
            plan.active_wpt[i] = plan.active_upload[i] = 1;
            plan.theta[i] = ris_phases_wpt(ch, plan.w[i], k, t, true);
            plan.theta_bar[i] = ris_phases_upload(ch, plan.u[i], k, t, true);
        }
    return plan;
}

struct BeamformingResult
{
    BeamformingPlan plan;
    std::vector<double> rate_history;    // weighted upload bits of active slots, entry 0 = warm start
    std::vector<double> harvest_history; // total harvested energy of active slots, entry 0 = warm start
    int iterations = 0;                  // sweeps that changed the metrics by more than tol
    bool converged = false;
};

namespace detail {

inline void plan_metrics(const Scenario &sc, const ChannelState &ch, const ResourceSchedule &x,
                         const BeamformingPlan &plan, double &rate, double &harvest)
{
    rate = 0.0;
    harvest = 0.0;
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            if (plan.active_upload[i])
                rate += sc.lambda[k] * uplink_bits(sc, ch, plan.u[i], plan.theta_bar[i], k, t, x.b(k, t), x.P(k, t));
            if (plan.active_wpt[i]) harvest += harvested_energy(sc, ch, plan.w[i], plan.theta[i], k, t, x.a(k, t));
        }
}

inline bool settled(double now, double before, double tol)
{
    const double scale = std::max(std::abs(now), std::abs(before));
    return scale == 0.0 || std::abs(now - before) <= tol * scale;
}

} // namespace detail

// Alternates MRT/MRC with phase alignment for every active slot, warm-started from `start`.
inline BeamformingResult alternating_beamforming(const Scenario &sc, const ChannelState &ch, const ResourceSchedule &x,
                                                 const BeamformingPlan &start)
{
    BeamformingResult res;
    res.plan = start;
    auto &plan = res.plan;
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            const bool wpt = x.a(k, t) > 0 && ch.effective(k, t, plan.theta[i]).norm() > 0;
            const bool up = x.b(k, t) > 0 && ch.effective(k, t, plan.theta_bar[i]).norm() > 0;
            if (!wpt)
            {
                plan.w[i].setZero();
                plan.theta[i].setZero();
            }
            if (!up)
            {
                plan.u[i].setZero();
                plan.theta_bar[i].setZero();
            }
            plan.active_wpt[i] = wpt;
            plan.active_upload[i] = up;
        }

    double rate = 0, harvest = 0;
    detail::plan_metrics(sc, ch, x, plan, rate, harvest);
    res.rate_history.push_back(rate);
    res.harvest_history.push_back(harvest);

    for (int j = 1; j <= sc.j_max; ++j)
    {
        for (int k = 0; k < sc.K; ++k)
            for (int t = 0; t < sc.T; ++t)
            {
                const auto i = plan.kt(k, t);
                if (plan.active_wpt[i])
                {
                    plan.w[i] = mrt_transmit(sc, ch, plan.theta[i], k, t, true);
                    plan.theta[i] = ris_phases_wpt(ch, plan.w[i], k, t, true);
                }
                if (plan.active_upload[i])
                {
                    plan.u[i] = mrc_receive(ch, plan.theta_bar[i], k, t, true);
                    plan.theta_bar[i] = ris_phases_upload(ch, plan.u[i], k, t, true);
                }
            }
        detail::plan_metrics(sc, ch, x, plan, rate, harvest);
        const bool done = detail::settled(rate, res.rate_history.back(), sc.tol_solver) &&
                          detail::settled(harvest, res.harvest_history.back(), sc.tol_solver);
        res.rate_history.push_back(rate);
        res.harvest_history.push_back(harvest);
        if (done)
        {
            res.converged = true;
            break;
        }
        res.iterations = j;
    }
    return res;
}

// Re-aligns phases to the stored beams, e.g. after the channels moved with the trajectory.
inline void realign_phases(const ChannelState &ch, BeamformingPlan &plan)
{
    for (int k = 0; k < plan.K; ++k)
        for (int t = 0; t < plan.T; ++t)
        {
            const auto i = plan.kt(k, t);
            if (plan.active_wpt[i]) plan.theta[i] = ris_phases_wpt(ch, plan.w[i], k, t, true);
            if (plan.active_upload[i]) plan.theta_bar[i] = ris_phases_upload(ch, plan.u[i], k, t, true);
        }
}

} // namespace uavris
