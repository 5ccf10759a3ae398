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

#include "catch_amalgamated.hpp"

#include <uavris/resource.hpp>
#include <uavris/trajectory.hpp>

#include <random>

using namespace uavris;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Resources solved on the initial trajectory with matched beams, i.e. a feasible SCA start.
struct Start
{
    Scenario sc;
    Trajectory Q;
    ChannelState ch;
    BeamformingPlan plan;
    ResourceSchedule X;
};

Start feasible_start(Scenario sc, Scheme scheme = Scheme::lossless, std::uint64_t seed = 5)
{
    Start s{sc, initial_trajectory(sc), {}, {}, {}};
    s.ch = assemble_channels(sc, s.Q);
    s.plan = random_plan(sc, s.ch, seed);
    s.X = solve_resources(build_resource_program(sc, s.ch, s.plan, scheme), sc).schedule;
    s.plan = alternating_beamforming(sc, s.ch, s.X, s.plan).plan;
    s.X = solve_resources(build_resource_program(sc, s.ch, s.plan, scheme), sc).schedule;
    return s;
}

// Default layout with T slots and a speed limit that keeps the overfly path reachable.
Scenario with_slots(int T)
{
    Scenario sc;
    sc.T = T;
    sc.V_max = 16.0 * 49.0 / (T - 1);
    return sc;
}

LinkCoefficients random_coefficients(std::mt19937_64 &rng)
{
    std::normal_distribution<double> nd;
    auto c = [&](double s) { return cd(s * nd(rng), s * nd(rng)); };
    LinkCoefficients r;
    r.A = c(1e-4);
    r.C = c(1e-1);
    r.B = r.A * std::conj(r.C);
    r.D = c(1e-3);
    r.G = c(1.0);
    r.F = r.D * std::conj(r.G);
    return r;
}

} // namespace

TEST_CASE("Initial trajectory flies over the BS within the speed limit")
{
    Scenario sc;
    const auto Q = initial_trajectory(sc);
    REQUIRE(Q.q.size() == static_cast<std::size_t>(sc.T));
    CHECK(Q.q.front() == sc.q1);
    CHECK(Q.q.back() == sc.qT);
    bool overfly = false;
    for (std::size_t t = 0; t < Q.q.size(); ++t)
    {
        CHECK(Q.q[t].z() == sc.z());
        overfly = overfly || (Q.q[t] - Vec3(0, 0, sc.z())).norm() < 1e-12;
        if (t + 1 < Q.q.size()) CHECK((Q.q[t + 1] - Q.q[t]).norm() <= sc.step_limit() * (1 + 1e-12));
    }
    CHECK(overfly);
}

TEST_CASE("Initial trajectory edge cases")
{
    Scenario sc;
    sc.q1 = sc.qT = Vec3(0, 0, sc.z());
    for (const auto &q : initial_trajectory(sc).q) CHECK(q == sc.q1);

    // the detour does not fit, the direct line does
    Scenario tight;
    tight.T = 41;
    const auto Q = initial_trajectory(tight);
    for (std::size_t t = 0; t + 1 < Q.q.size(); ++t) CHECK((Q.q[t + 1] - Q.q[t]).norm() <= tight.step_limit() * (1 + 1e-12));
    for (const auto &q : Q.q) CHECK(q.y() == 10.0);

    Scenario unreachable;
    unreachable.T = 10;
    CHECK_THROWS_AS(initial_trajectory(unreachable), InfeasibleError);
}

TEST_CASE("Linearised rate and energy are exact at the expansion point")
{
    Scenario sc;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(20, 400), frac(0.01, 1.0);
    for (int i = 0; i < 200; ++i)
    {
        const auto c = random_coefficients(rng);
        const double x0 = pos(rng), y0 = pos(rng), b = frac(rng), a = frac(rng), P = frac(rng) * 1e-3;
        CHECK_THAT(taylor_rate_bound(sc, c, x0, y0, b, P)(x0, y0), WithinRel(aligned_rate_slack(sc, c, x0, y0, b, P), 1e-9));
        CHECK_THAT(taylor_energy_bound(sc, c, x0, y0, a)(x0, y0), WithinRel(aligned_energy_slack(sc, c, x0, y0, a), 1e-9));
    }
}

TEST_CASE("Gradients match finite differences of the aligned forms")
{
    Scenario sc;
    std::mt19937_64 rng(12);
    const auto c = random_coefficients(rng);
    const double x0 = 90, y0 = 150, b = 0.2, a = 0.5, P = 1e-4, h = 1e-2;
    const auto rb = taylor_rate_bound(sc, c, x0, y0, b, P);
    const auto eb = taylor_energy_bound(sc, c, x0, y0, a);
    auto fd = [&](auto f, double dx, double dy) { return (f(x0 + dx, y0 + dy) - f(x0 - dx, y0 - dy)) / (2 * h); };
    auto R = [&](double x, double y) { return aligned_rate_slack(sc, c, x, y, b, P); };
    auto E = [&](double x, double y) { return aligned_energy_slack(sc, c, x, y, a); };
    CHECK_THAT(rb.dx, WithinRel(fd(R, h, 0), 1e-6));
    CHECK_THAT(rb.dy, WithinRel(fd(R, 0, h), 1e-6));
    CHECK_THAT(eb.dx, WithinRel(fd(E, h, 0), 1e-6));
    CHECK_THAT(eb.dy, WithinRel(fd(E, 0, h), 1e-6));
}

TEST_CASE("Energy linearisation is a global lower bound")
{
    Scenario sc;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> pos(20, 400), scale(0.05, 20.0);
    for (int i = 0; i < 100; ++i)
    {
        const auto c = random_coefficients(rng);
        const double x0 = pos(rng), y0 = pos(rng);
        const auto eb = taylor_energy_bound(sc, c, x0, y0, 0.7);
        for (int j = 0; j < 100; ++j)
        {
            const double x = x0 * scale(rng), y = y0 * scale(rng);
            const double E = aligned_energy_slack(sc, c, x, y, 0.7);
            CHECK(E >= eb(x, y) - 1e-12 * E);
        }
    }
}

TEST_CASE("Distance-independent links give constant bounds")
{
    Scenario sc;
    LinkCoefficients c;
    c.A = cd(3e-4, 1e-4);
    c.D = cd(-2e-3, 5e-4);
    const auto rb = taylor_rate_bound(sc, c, 50, 70, 0.3, 1e-3);
    CHECK(rb.dx == 0.0);
    CHECK(rb.dy == 0.0);
    CHECK_THAT(rb(10, 1000), WithinRel(rate_bits(sc, std::norm(c.A), 0.3, 1e-3), 1e-12));
    const auto eb = taylor_energy_bound(sc, c, 50, 70, 0.4);
    CHECK(eb.dx == 0.0);
    CHECK(eb.dy == 0.0);
    CHECK_THAT(eb(1, 1), WithinRel(sc.eta_0 * sc.delta_t * 0.4 * std::norm(c.D), 1e-12));
}

TEST_CASE("Nonpositive expansion points are rejected")
{
    Scenario sc;
    LinkCoefficients c;
    CHECK_THROWS_AS(taylor_rate_bound(sc, c, 0.0, 1.0, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(taylor_energy_bound(sc, c, 1.0, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("Aligned forms at the expansion point equal the link-model values")
{
    const Scenario sc = with_slots(12);
    const auto s = feasible_start(sc);
    const auto sp = slack_point(s.sc, s.ch);
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = s.plan.kt(k, t);
            const auto c = trajectory_coefficients(s.ch, s.plan, k, t);
            if (s.plan.active_upload[i])
                CHECK_THAT(taylor_rate_bound(sc, c, sp.x(k, t), sp.y[t], s.X.b(k, t), s.X.P(k, t)).value,
                           WithinRel(uplink_bits(sc, s.ch, s.plan.u[i], s.plan.theta_bar[i], k, t, s.X.b(k, t), s.X.P(k, t)), 1e-9));
            if (s.plan.active_wpt[i])
                CHECK_THAT(taylor_energy_bound(sc, c, sp.x(k, t), sp.y[t], s.X.a(k, t)).value,
                           WithinRel(harvested_energy(sc, s.ch, s.plan.w[i], s.plan.theta[i], k, t, s.X.a(k, t)), 1e-9));
        }
}

TEST_CASE("Trajectory subproblem is valid and contains its expansion point")
{
    for (double alpha : {2.0, 3.0})
        for (auto scheme : {Scheme::lossless, Scheme::lossy, Scheme::none})
        {
            Scenario sc = with_slots(12);
            sc.alpha_RU = alpha;
            sc.alpha_BR = alpha;
            const auto s = feasible_start(sc, scheme);
            const auto tp = build_p7(s.sc, s.ch, s.plan, s.X, s.Q, scheme);
            CHECK_NOTHROW(cvx::validate(tp.prog));
            const auto x0 = tp.prog.start_point();
            const auto rep = check_feasibility(tp.prog, x0, 1e-6);
            for (const auto &r : rep.violations) UNSCOPED_INFO(r.name << " " << r.value);
            CHECK(rep.feasible());
            // the surrogate objective at the expansion point is the true objective
            CHECK_THAT(tp.prog.objective.value(x0), WithinRel(weighted_raw_bits(s.sc, s.ch, s.plan, s.X, scheme), 1e-6));
            const auto Q = extract_trajectory(s.sc, tp, x0);
            for (std::size_t t = 0; t < Q.q.size(); ++t) CHECK((Q.q[t] - s.Q.q[t]).norm() == 0.0);
        }
}

TEST_CASE("SCA never lowers the true objective and keeps the design feasible")
{
    const Scenario sc = with_slots(20);
    for (auto scheme : {Scheme::lossless, Scheme::none})
    {
        const auto s = feasible_start(sc, scheme);
        const auto r = sca_trajectory(s.sc, s.plan, s.X, scheme, s.Q);
        CHECK(r.iterations <= sc.i_max_sca);
        for (std::size_t i = 1; i < r.log.size(); ++i)
        {
            CHECK(r.log[i].true_objective >= r.log[i - 1].true_objective);
            CHECK(r.log[i].rate_audit_violations == 0);
            CHECK(r.log[i].energy_audit_violations == 0);
            CHECK(r.log[i].slack_gap <= 1e-4);
        }
        CHECK(r.log.back().true_objective >= r.log.front().true_objective);
        const auto ch = assemble_channels(s.sc, r.Q);
        CHECK_THAT(weighted_raw_bits(s.sc, ch, r.plan, s.X, scheme), WithinRel(r.log.back().true_objective, 1e-12));
        CHECK(schedule_violations(s.sc, ch, r.plan, s.X, scheme, 1e-6).empty());
        CHECK(r.Q.q.front() == sc.q1);
        CHECK(r.Q.q.back() == sc.qT);
        for (std::size_t t = 0; t + 1 < r.Q.q.size(); ++t)
            CHECK((r.Q.q[t + 1] - r.Q.q[t]).norm() <= sc.step_limit() * (1 + 1e-6));
    }
}

TEST_CASE("Single-UE trajectory is locally optimal against perturbations")
{
    Scenario sc;
    sc.K = 1;
    sc.T = 12;
    sc.lambda = {1.0};
    sc.kappa = {0.5};
    sc.kappa_bar = {0.5};
    sc.q = {Vec3(-3.0, 2.0, 0.0)};
    sc.q1 = Vec3(-2.0, 2.0, 8.0);
    sc.qT = Vec3(1.0, 1.0, 8.0);
    sc.i_max_sca = 15;
    const auto s = feasible_start(sc);
    const auto r = sca_trajectory(s.sc, s.plan, s.X, Scheme::lossless, s.Q);
    const double best = r.log.back().true_objective;
    REQUIRE(best > 0);

    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd(0.0, 0.05);
    int compared = 0;
    for (int trial = 0; trial < 50; ++trial)
    {
        Trajectory Q = r.Q;
        for (std::size_t t = 1; t + 1 < Q.q.size(); ++t) Q.q[t] += Vec3(nd(rng), nd(rng), 0.0);
        bool ok = true;
        for (std::size_t t = 0; t + 1 < Q.q.size(); ++t) ok = ok && (Q.q[t + 1] - Q.q[t]).norm() <= sc.step_limit();
        if (!ok) continue;
        const auto ch = assemble_channels(sc, Q);
        const auto plan = alternating_beamforming(sc, ch, s.X, r.plan).plan;
        if (!schedule_violations(sc, ch, plan, s.X, Scheme::lossless, 1e-9).empty()) continue;
        ++compared;
        CHECK(weighted_raw_bits(sc, ch, plan, s.X, Scheme::lossless) <= best * (1 + sc.tol_sca));
    }
    CHECK(compared > 0);
}

TEST_CASE("SCA log table has a stable schema")
{
    const Scenario sc = with_slots(8);
    const auto s = feasible_start(sc);
    const auto r = sca_trajectory(s.sc, s.plan, s.X, Scheme::lossless, s.Q);
    const auto csv = sca_log_table(r).str();
    CHECK(csv.rfind("iteration,surrogate_objective,true_objective,slack_gap,step,", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
}
