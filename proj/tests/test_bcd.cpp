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

#include <uavris/bcd.hpp>

using namespace uavris;
using Catch::Matchers::WithinRel;

namespace {

StageRecord stage(int it, double r, double b, double t) { return {it, r, b, t, 0, 0, 0, 0, false}; }

} // namespace

TEST_CASE("Monotonicity audit")
{
    CHECK(monotonicity_audit({stage(1, 5, 5, 5), stage(2, 5, 5, 5)}).passed());
    CHECK(monotonicity_audit({stage(1, 1, 2, 3), stage(2, 4, 5, 6)}).passed());
    // a drop within tolerance passes
    CHECK(monotonicity_audit({stage(1, 1, 1 - 1e-9, 1)}).passed());

    const auto rep = monotonicity_audit({stage(1, 1, 2, 3), stage(2, 3, 2.97, 3.1)});
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].iteration == 2);
    CHECK(rep.violations[0].stage == "beamforming");
    CHECK_THAT(rep.violations[0].drop, WithinRel(0.01, 1e-9));

    const auto first = monotonicity_audit({stage(1, 2, 2, 2)}, 1e-6, 3.0);
    REQUIRE(first.violations.size() == 1);
    CHECK(first.violations[0].stage == "resources");
}

TEST_CASE("Zero channel gains stop after one iteration with a zero objective")
{
    Scenario sc;
    sc.h0 = 0.0;
    const auto sol = optimize(sc, Scheme::lossless);
    CHECK(sol.objective == 0.0);
    CHECK(sol.iterations == 1);
    CHECK(sol.status == BcdStatus::converged);
    CHECK(sol.audit.passed());
}

TEST_CASE("Defaults converge within ten iterations and stay feasible")
{
    const Scenario sc;
    const auto sol = optimize(sc, Scheme::lossless);
    CHECK(sol.status == BcdStatus::converged);
    REQUIRE(sol.iterations <= 10);
    const auto &h = sol.objective_history;
    REQUIRE(h.size() >= 2);
    CHECK(std::abs(h.back() - h[h.size() - 2]) < 1e-3 * h.back());
    CHECK(sol.audit.passed());
    const auto viol = check_solution(sc, sol, 1e-6);
    for (const auto &v : viol) UNSCOPED_INFO(v.name << " excess " << v.excess);
    CHECK(viol.empty());
    for (const auto &run : sol.sca_runs)
        for (const auto &it : run.log) CHECK(it.rate_audit_violations == 0);

    SECTION("objective evaluates through the link models")
    {
        CHECK_THAT(objective(sol, sc, Scheme::lossless), WithinRel(sol.objective, 1e-12));
        // resource-stage objective of the last iteration agrees with its solver
        const auto rp = build_resource_program(sc, sol.channels, sol.plan, Scheme::lossless);
        const auto res = solve_resources(rp, sc);
        CHECK_THAT(weighted_raw_bits(sc, sol.channels, sol.plan, res.schedule, Scheme::lossless),
                   WithinRel(res.solution.objective, 1e-6));
    }

    SECTION("objective is linear in the weights")
    {
        Scenario scaled = sc;
        for (auto &l : scaled.lambda) l *= 3.5;
        CHECK_THAT(objective(sol, scaled, Scheme::lossless), WithinRel(3.5 * sol.objective, 1e-12));
    }

    SECTION("one more iteration barely moves the objective")
    {
        BcdState s{sol.trajectory, sol.channels, sol.plan, sol.schedule, true, sol.objective};
        const auto rec = bcd_iteration(sc, Scheme::lossless, s, sol.iterations + 1);
        CHECK(rec.after_trajectory >= sol.objective * (1 - 1e-6));
        CHECK(std::abs(rec.after_trajectory - sol.objective) < sc.tol_bcd * sol.objective);
    }
}

TEST_CASE("All-zero schedule has zero objective")
{
    const Scenario sc;
    FullSolution sol;
    sol.trajectory = initial_trajectory(sc);
    sol.channels = assemble_channels(sc, sol.trajectory);
    sol.plan = random_plan(sc, sol.channels, 1);
    sol.schedule = ResourceSchedule::zeros(sc.K, sc.T);
    for (auto scheme : {Scheme::lossless, Scheme::lossy, Scheme::none}) CHECK(objective(sol, sc, scheme) == 0.0);
}

TEST_CASE("Scheme ordering of optimised designs")
{
    Scenario sc;
    sc.T = 30;
    sc.V_max = 16.0 * 49.0 / 29.0;
    for (double scale : {1.0, 1e3})
    {
        sc.cycle_unit_scale = scale;
        const double lossless = optimize(sc, Scheme::lossless).objective;
        const double lossy = optimize(sc, Scheme::lossy).objective;
        const double none = optimize(sc, Scheme::none).objective;
        CHECK(lossless >= lossy * (1 - 1e-6));
        CHECK(lossy >= none * (1 - 1e-6));
    }
}

TEST_CASE("Warm starts continue from a finished design")
{
    Scenario sc;
    sc.T = 20;
    sc.V_max = 16.0 * 49.0 / 19.0;
    const auto none = optimize(sc, Scheme::none);
    const auto lossy = optimize(sc, Scheme::lossy, {1, 1e-6, {}, design_start(none)});
    CHECK(lossy.objective >= none.objective);
    CHECK(lossy.audit.passed());
    CHECK(check_solution(sc, lossy, 1e-6).empty());

    // the incumbent schedule is feasible without compression, so it starts the audit chain
    const auto state = warm_state(sc, Scheme::none, design_start(none));
    CHECK(state.has_schedule);
    CHECK_THAT(state.objective, WithinRel(none.objective, 1e-12));

    // a schedule that compresses is not a valid incumbent for the scheme without compression
    const auto lossless = optimize(sc, Scheme::lossless);
    REQUIRE(lossless.schedule.f.maxCoeff() > 0);
    const auto fallback = warm_state(sc, Scheme::none, design_start(lossless));
    CHECK_FALSE(fallback.has_schedule);
    CHECK(fallback.X.f.isZero());
    CHECK(fallback.X.b.isZero());

    CHECK_THROWS_AS(optimize(sc, Scheme::lossy, {1, 1e-6, none.trajectory, design_start(none)}), std::invalid_argument);
}

TEST_CASE("Runs are reproducible under a fixed seed")
{
    Scenario sc;
    sc.T = 20;
    sc.V_max = 16.0 * 49.0 / 19.0;
    const auto a = optimize(sc, Scheme::lossy, {7, 1e-6, {}, {}});
    const auto b = optimize(sc, Scheme::lossy, {7, 1e-6, {}, {}});
    CHECK(a.objective == b.objective);
    CHECK(schedule_table(a).str() == schedule_table(b).str());
    CHECK(trajectory_table(a.trajectory).str() == trajectory_table(b.trajectory).str());
}

TEST_CASE("Run summary and tables")
{
    Scenario sc;
    sc.T = 10;
    sc.V_max = 16.0 * 49.0 / 9.0;
    const auto sol = optimize(sc, Scheme::none);
    const auto text = run_summary(sc, sol);
    CHECK(text.find("scheme: none\n") != std::string::npos);
    CHECK(text.find("monotonicity_audit: pass") != std::string::npos);
    CHECK(text.find("feasibility: pass") != std::string::npos);
    CHECK(history_table(sol).rows() == static_cast<std::size_t>(sol.iterations));
    CHECK(schedule_table(sol).rows() == static_cast<std::size_t>(sc.K * sc.T));
    CHECK(trajectory_table(sol.trajectory).rows() == static_cast<std::size_t>(sc.T));
}
