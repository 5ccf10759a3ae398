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

#include <uavris/oracles.hpp>
#include <uavris/resource.hpp>

using namespace uavris;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory sweep(const Scenario &sc)
{
    Trajectory Q;
    for (int t = 0; t < sc.T; ++t)
    {
        const double s = static_cast<double>(t) / (sc.T - 1);
        Q.q.push_back(sc.at_altitude(-10 + 20 * s, 10 - 10 * std::sin(std::numbers::pi * s)));
    }
    return Q;
}

struct Setup
{
    Scenario sc;
    ChannelState ch;
    BeamformingPlan plan;
};

Setup setup(Scenario sc, std::uint64_t seed = 3)
{
    auto ch = assemble_channels(sc, sweep(sc));
    auto plan = random_plan(sc, ch, seed);
    return {sc, std::move(ch), std::move(plan)};
}

int free_f(const ResourceProgram &rp)
{
    int n = 0;
    for (int v : rp.f) n += !rp.prog.vars[static_cast<std::size_t>(v)].fixed();
    return n;
}

} // namespace

TEST_CASE("Resource programs pass curvature validation")
{
    Scenario sc;
    sc.T = 10;
    const auto s = setup(sc);
    for (auto scheme : {Scheme::lossless, Scheme::lossy, Scheme::none})
    {
        const auto rp = build_resource_program(s.sc, s.ch, s.plan, scheme);
        CHECK_NOTHROW(cvx::validate(rp.prog));
        const auto x0 = rp.prog.start_point();
        CHECK(check_feasibility(rp.prog, x0, 0.0, 0.0).feasible());
        for (const auto &c : rp.prog.constraints) CHECK(c.expr.value(x0) < 0);
    }
    CHECK(free_f(build_p3(s.sc, s.ch, s.plan)) > 0);
    CHECK(free_f(build_resource_program(s.sc, s.ch, s.plan, Scheme::none)) == 0);
}

TEST_CASE("Unit compression ratio removes compression terms")
{
    Scenario sc;
    sc.T = 6;
    sc.kappa = {1.0, 1.0, 1.0, 1.0};
    const auto s = setup(sc);
    const auto rp = build_p3(s.sc, s.ch, s.plan);
    CHECK(free_f(rp) == 0);
    const auto none = build_resource_program(s.sc, s.ch, s.plan, Scheme::none);
    const auto a = solve_resources(rp, s.sc), b = solve_resources(none, s.sc);
    CHECK_THAT(a.solution.objective, WithinRel(b.solution.objective, 1e-6));
    CHECK(a.schedule.f.isZero());

    sc.kappa = {0.5, 0.5, 0.5, 0.5};
    sc.kappa_bar = {1.0, 1.0, 1.0, 1.0};
    CHECK(free_f(build_lossy(sc, s.ch, s.plan)) == 0);
}

TEST_CASE("Full compression share blocks uploading")
{
    Scenario sc;
    sc.T = 4;
    sc.gamma = 1.0;
    const auto s = setup(sc);
    const auto rp = build_p3(s.sc, s.ch, s.plan);
    const auto res = solve_resources(rp, s.sc);
    CHECK(res.schedule.b.isZero());
    CHECK(res.schedule.P.isZero());
    CHECK(res.schedule.f.isZero());
    CHECK(res.solution.objective == 0.0);
}

TEST_CASE("Zero channel gains give an all-zero schedule")
{
    Scenario sc;
    sc.T = 4;
    sc.h0 = 0.0;
    const auto s = setup(sc);
    const auto res = solve_resources(build_p3(s.sc, s.ch, s.plan), s.sc);
    CHECK(res.solution.objective == 0.0);
    for (const auto *m : {&res.schedule.f, &res.schedule.P, &res.schedule.a, &res.schedule.b}) CHECK(m->isZero());
}

TEST_CASE("Power recovery")
{
    auto s = ResourceSchedule::zeros(1, 3);
    s.b << 0.5, 0.0, 1e-12;
    s.p << 0.05, 0.0, 1e-3;
    const auto r = recover_power(s);
    CHECK_THAT(r.P(0, 0), WithinRel(0.1, 1e-15));
    CHECK(r.P(0, 1) == 0.0);
    CHECK(r.P(0, 2) == 0.0);
}

TEST_CASE("Compression is limited by recovered uploads")
{
    const Scenario sc;
    SlotGains g;
    g.upload = Eigen::MatrixXd::Constant(1, 3, 1e-9);
    auto s = ResourceSchedule::zeros(1, 3);
    s.b << 0.1, 1e-12, 0.1;
    s.P << 0.01, 0.0, 0.01;
    const double R = rate_bits(sc, 1e-9, 0.1, 0.01);
    const auto cm = compression_model(sc, Scheme::lossless, 0);
    // first slot asks for twice its upload; the prefix through slot 2 then fits
    s.f << 2 * R / cm.uploaded_bits_per_f, 0.0, 0.0;
    const auto r = limit_compression_to_uploads(s, sc, Scheme::lossless, g);
    CHECK_THAT(r.f(0, 0) * cm.uploaded_bits_per_f, WithinRel(R, 1e-12));
    // no upload at all removes compression
    s.b.setZero();
    s.P.setZero();
    CHECK(limit_compression_to_uploads(s, sc, Scheme::lossless, g).f.isZero());
    // feasible schedules and schemes without compression are untouched
    s.f.setConstant(1e-3);
    CHECK(limit_compression_to_uploads(s, sc, Scheme::none, g).f == s.f);
}

TEST_CASE("Solved schedules are feasible and reproduce the objective through the link models")
{
    Scenario sc;
    sc.T = 12;
    for (double scale : {1.0, 1e3})
    {
        sc.cycle_unit_scale = scale;
        const auto s = setup(sc);
        for (auto scheme : {Scheme::lossless, Scheme::lossy, Scheme::none})
        {
            const auto rp = build_resource_program(s.sc, s.ch, s.plan, scheme);
            const auto res = solve_resources(rp, s.sc);
            REQUIRE(res.solution.status == cvx::Status::optimal);
            CHECK(check_feasibility(rp.prog, res.solution.x, 1e-6).feasible());
            const auto v = schedule_violations(s.sc, s.ch, s.plan, res.schedule, scheme, 1e-6);
            for (const auto &e : v) UNSCOPED_INFO(e.name << " excess " << e.excess);
            CHECK(v.empty());
            CHECK_THAT(weighted_raw_bits(s.sc, s.ch, s.plan, res.schedule, scheme),
                       WithinRel(res.solution.objective, 1e-6));
            CHECK(res.solution.objective > 0);

            // cumulative spend never exceeds cumulative harvest
            for (int k = 0; k < s.sc.K; ++k)
            {
                double spent = 0, got = 0;
                for (int t = 0; t < s.sc.T; ++t)
                {
                    got += rp.gains.harvest(k, t) * res.schedule.a(k, t);
                    spent += compression_energy(res.schedule.f(k, t), s.sc) + s.sc.delta_t * res.schedule.p(k, t);
                    CHECK(spent <= got * (1 + 1e-6) + 1e-300);
                }
            }
        }
    }
}

TEST_CASE("Scheme ordering at fixed beams and trajectory")
{
    Scenario sc;
    sc.T = 10;
    sc.cycle_unit_scale = 1e3;
    const auto s = setup(sc);
    const double lossless = solve_resources(build_p3(s.sc, s.ch, s.plan), s.sc).solution.objective;
    const double lossy = solve_resources(build_lossy(s.sc, s.ch, s.plan), s.sc).solution.objective;
    const double none = solve_resources(build_resource_program(s.sc, s.ch, s.plan, Scheme::none), s.sc).solution.objective;
    CHECK(lossless >= lossy * (1 - 1e-6));
    CHECK(lossy >= none * (1 - 1e-6));
    CHECK(lossless > none);
}

TEST_CASE("Objective grows with transmit power")
{
    Scenario sc;
    sc.T = 8;
    double prev = 0.0;
    for (double dbm : {25.0, 30.0, 35.0, 40.0})
    {
        sc.P_T = dbm_to_watts(dbm);
        const auto s = setup(sc);
        const double v = solve_resources(build_p3(s.sc, s.ch, s.plan), s.sc).solution.objective;
        CHECK(v >= prev * (1 - 1e-6));
        prev = v;
    }
}

TEST_CASE("Single-UE programs match grid search")
{
    for (double scale : {1.0, 1e3})
    {
        Scenario sc;
        sc.cycle_unit_scale = scale;
        for (auto scheme : {Scheme::lossless, Scheme::lossy, Scheme::none})
        {
            const auto one = resource_oracle(sc, 1, scheme, 200, 21, 6);
            INFO(one.name << ": " << one.detail);
            CHECK(one.passed);
        }
        const auto two = resource_oracle(sc, 2, Scheme::lossless, 16, 9, 12);
        INFO(two.name << ": " << two.detail);
        CHECK(two.passed);
    }
}
