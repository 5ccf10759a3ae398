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

// Block coordinate ascent over resources, beams and trajectory, with a stage-wise
// monotonicity audit and a link-model feasibility check of the final design.

#pragma once

#include "beamforming.hpp"
#include "channel.hpp"
#include "csv.hpp"
#include "resource.hpp"
#include "scenario.hpp"
#include "trajectory.hpp"

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace uavris {

// Weighted raw bits after each block of one iteration.
struct StageRecord
{
    int iteration = 0;
    double after_resources = 0.0;
    double after_beamforming = 0.0;
    double after_trajectory = 0.0;
    int beamforming_sweeps = 0;
    int sca_iterations = 0;
    int solver_newton_steps = 0;
    int rate_audit_violations = 0;
    bool kept_previous_schedule = false;
};

struct AuditViolation
{
    int iteration = 0;
    std::string stage;
    double drop = 0.0; // relative decrease
};

struct AuditReport
{
    std::vector<AuditViolation> violations;
    bool passed() const { return violations.empty(); }
};

// Checks that every block leaves the objective no lower than it found it, starting from `initial`.
inline AuditReport monotonicity_audit(const std::vector<StageRecord> &history, double tol = 1e-6, double initial = 0.0)
{
    AuditReport rep;
    double before = initial;
    auto check = [&](int it, const char *stage, double now) {
        const double scale = std::max(std::abs(before), std::abs(now));
        if (now < before - tol * scale) rep.violations.push_back({it, stage, (before - now) / scale});
        before = now;
    };
    for (const auto &r : history)
    {
        check(r.iteration, "resources", r.after_resources);
        check(r.iteration, "beamforming", r.after_beamforming);
        check(r.iteration, "trajectory", r.after_trajectory);
    }
    return rep;
}

enum class BcdStatus
{
    converged,
    max_iterations,
    nonmonotone
};

inline const char *to_string(BcdStatus s)
{
    switch (s)
    {
    case BcdStatus::converged: return "converged";
    case BcdStatus::max_iterations: return "max_iterations";
    case BcdStatus::nonmonotone: return "nonmonotone";
    }
    return "?";
}

struct BcdState
{
    Trajectory Q;
    ChannelState ch;
    BeamformingPlan plan;
    ResourceSchedule X;
    bool has_schedule = false;
    double objective = 0.0;
};

struct FullSolution
{
    Scheme scheme = Scheme::lossless;
    ResourceSchedule schedule;
    BeamformingPlan plan;
    Trajectory trajectory;
    ChannelState channels;
    std::vector<StageRecord> history;
    std::vector<double> objective_history; // after each full iteration
    std::vector<ScaResult> sca_runs;
    AuditReport audit;
    BcdStatus status = BcdStatus::max_iterations;
    double objective = 0.0;
    int iterations = 0;
};

inline BcdState initial_state(const Scenario &sc, std::uint64_t seed, const Trajectory *fixed = nullptr)
{
    BcdState s;
    s.Q = fixed ? *fixed : initial_trajectory(sc);
    s.ch = assemble_channels(sc, s.Q);
    s.plan = random_plan(sc, s.ch, seed);
    s.X = ResourceSchedule::zeros(sc.K, sc.T);
    return s;
}

// One pass over the three blocks; the trajectory block is skipped when move_trajectory is false.
inline StageRecord bcd_iteration(const Scenario &sc, Scheme scheme, BcdState &s, int iteration, ScaResult *sca_out = nullptr,
                                 bool move_trajectory = true)
{
    StageRecord rec;
    rec.iteration = iteration;

    const auto rp = build_resource_program(sc, s.ch, s.plan, scheme);
    auto res = solve_resources(rp, sc);
    rec.solver_newton_steps = res.solution.newton_steps;
    double v = weighted_raw_bits(sc, s.ch, s.plan, res.schedule, scheme);
    if (s.has_schedule && v < s.objective)
    {
        rec.kept_previous_schedule = true;
        v = s.objective;
    }
    else
        s.X = std::move(res.schedule);
    s.has_schedule = true;
    rec.after_resources = v;

    const auto ao = alternating_beamforming(sc, s.ch, s.X, s.plan);
    s.plan = ao.plan;
    rec.beamforming_sweeps = static_cast<int>(ao.rate_history.size()) - 1;
    rec.after_beamforming = weighted_raw_bits(sc, s.ch, s.plan, s.X, scheme);
    if (!move_trajectory)
    {
        rec.after_trajectory = rec.after_beamforming;
        s.objective = rec.after_trajectory;
        return rec;
    }

    auto sca = sca_trajectory(sc, s.plan, s.X, scheme, s.Q, static_cast<std::uint64_t>(iteration));
    s.Q = sca.Q;
    s.plan = sca.plan;
    s.ch = assemble_channels(sc, s.Q);
    rec.sca_iterations = sca.iterations;
    for (const auto &it : sca.log) rec.rate_audit_violations += it.rate_audit_violations;
    rec.after_trajectory = weighted_raw_bits(sc, s.ch, s.plan, s.X, scheme);
    s.objective = rec.after_trajectory;
    if (sca_out) *sca_out = std::move(sca);
    return rec;
}

// A finished design to continue from, e.g. the result of a scheme with fewer options.
struct DesignStart
{
    Trajectory trajectory;
    BeamformingPlan plan;
    ResourceSchedule schedule;
};

struct BcdOptions
{
    std::uint64_t seed = 1;
    double audit_tol = 1e-6;
    std::optional<Trajectory> hover; // fixed trajectory; the trajectory block is skipped
    std::optional<DesignStart> warm; // replaces the initial trajectory and random beams
};

inline DesignStart design_start(const FullSolution &sol) { return {sol.trajectory, sol.plan, sol.schedule}; }

// Starts from a finished design. Its schedule becomes the incumbent when it is feasible
// under `scheme`, so the result never falls below the design's objective.
inline BcdState warm_state(const Scenario &sc, Scheme scheme, const DesignStart &d)
{
    if (d.trajectory.q.size() != static_cast<std::size_t>(sc.T)) throw std::invalid_argument("warm start must have T positions");
    BcdState s{d.trajectory, assemble_channels(sc, d.trajectory), d.plan, d.schedule, false, 0.0};
    if (schedule_violations(sc, s.ch, s.plan, s.X, scheme, 1e-9).empty())
    {
        s.has_schedule = true;
        s.objective = weighted_raw_bits(sc, s.ch, s.plan, s.X, scheme);
    }
    else
        s.X = ResourceSchedule::zeros(sc.K, sc.T);
    return s;
}

inline FullSolution optimize(const Scenario &sc, Scheme scheme, const BcdOptions &opt = {})
{
    validate(sc);
    FullSolution sol;
    sol.scheme = scheme;
    if (opt.hover && opt.hover->q.size() != static_cast<std::size_t>(sc.T))
        throw std::invalid_argument("fixed trajectory must have T positions");
    if (opt.hover && opt.warm) throw std::invalid_argument("a fixed trajectory and a warm start are exclusive");
    auto s = opt.warm ? warm_state(sc, scheme, *opt.warm) : initial_state(sc, opt.seed, opt.hover ? &*opt.hover : nullptr);
    const double start = s.objective;
    bool converged = false;
    for (int i = 1; i <= sc.i_max; ++i)
    {
        const double before = s.objective;
        ScaResult sca;
        sol.history.push_back(bcd_iteration(sc, scheme, s, i, &sca, !opt.hover));
        if (!opt.hover) sol.sca_runs.push_back(std::move(sca));
        sol.objective_history.push_back(s.objective);
        sol.iterations = i;
        if (detail::relative_change(s.objective, before) < sc.tol_bcd)
        {
            converged = true;
            break;
        }
    }
    sol.audit = monotonicity_audit(sol.history, opt.audit_tol, start);
    sol.status = !sol.audit.passed() ? BcdStatus::nonmonotone : converged ? BcdStatus::converged : BcdStatus::max_iterations;
    sol.schedule = s.X;
    sol.plan = s.plan;
    sol.trajectory = s.Q;
    sol.channels = s.ch;
    sol.objective = s.objective;
    return sol;
}

// Weighted raw bits of a complete design through the link models.
inline double objective(const FullSolution &sol, const Scenario &sc, Scheme scheme)
{
    return weighted_raw_bits(sc, sol.channels, sol.plan, sol.schedule, scheme);
}

// Every design constraint re-evaluated through the link models.
inline std::vector<ConstraintViolation> check_solution(const Scenario &sc, const FullSolution &sol, double tol)
{
    auto out = schedule_violations(sc, sol.channels, sol.plan, sol.schedule, sol.scheme, tol);
    const auto &q = sol.trajectory.q;
    const double vmax = sc.step_limit();
    for (std::size_t t = 0; t + 1 < q.size(); ++t)
    {
        const double step = (q[t + 1] - q[t]).norm();
        if (step > vmax * (1 + tol)) out.push_back({"speed[" + std::to_string(t) + "]", step - vmax, (step - vmax) / vmax});
    }
    auto endpoint = [&](const char *name, const Vec3 &got, const Vec3 &want) {
        const double e = (got - want).norm();
        if (e > tol * std::max(1.0, want.norm())) out.push_back({name, e, e / std::max(1.0, want.norm())});
    };
    endpoint("start", q.front(), sc.q1);
    endpoint("end", q.back(), sc.qT);
    for (std::size_t t = 0; t < q.size(); ++t)
        if (std::abs(q[t].z() - sc.z()) > tol * std::max(1.0, std::abs(sc.z())))
            out.push_back({"altitude[" + std::to_string(t) + "]", std::abs(q[t].z() - sc.z()), 0.0});
    return out;
}

// SCA iterations of every BCD iteration, one row each.
inline CsvTable sca_history_table(const FullSolution &sol)
{
    std::vector<std::string> header{"bcd_iteration"};
    const auto columns = sca_log_table({}).header();
    header.insert(header.end(), columns.begin(), columns.end());
    CsvTable t(header);
    for (std::size_t i = 0; i < sol.sca_runs.size(); ++i)
    {
        const auto log = sca_log_table(sol.sca_runs[i]);
        for (std::size_t r = 0; r < log.rows(); ++r)
        {
            std::vector<CsvTable::Cell> row{static_cast<long long>(i + 1)};
            for (const auto &c : log.row(r)) row.push_back(c);
            t.add_row(std::move(row));
        }
    }
    return t;
}

inline CsvTable history_table(const FullSolution &sol)
{
    CsvTable t({"iteration", "after_resources", "after_beamforming", "after_trajectory", "beamforming_sweeps",
                "sca_iterations", "rate_audit_violations", "kept_previous_schedule"});
    for (const auto &r : sol.history)
        t.add_row({static_cast<long long>(r.iteration), r.after_resources, r.after_beamforming, r.after_trajectory,
                   static_cast<long long>(r.beamforming_sweeps), static_cast<long long>(r.sca_iterations),
                   static_cast<long long>(r.rate_audit_violations), static_cast<long long>(r.kept_previous_schedule)});
    return t;
}

inline CsvTable schedule_table(const FullSolution &sol)
{
    CsvTable t({"t", "k", "f", "P", "a", "b"});
    const auto &X = sol.schedule;
    for (Eigen::Index tt = 0; tt < X.f.cols(); ++tt)
        for (Eigen::Index k = 0; k < X.f.rows(); ++k)
            t.add_row({static_cast<long long>(tt), static_cast<long long>(k), X.f(k, tt), X.P(k, tt), X.a(k, tt), X.b(k, tt)});
    return t;
}

inline CsvTable trajectory_table(const Trajectory &Q)
{
    CsvTable t({"t", "x", "y", "z"});
    for (std::size_t i = 0; i < Q.q.size(); ++i)
        t.add_row({static_cast<long long>(i), Q.q[i].x(), Q.q[i].y(), Q.q[i].z()});
    return t;
}

inline std::string run_summary(const Scenario &sc, const FullSolution &sol)
{
    std::ostringstream os;
    char buf[256];
    os << "scheme: " << to_string(sol.scheme) << "\n";
    os << "status: " << to_string(sol.status) << "\n";
    std::snprintf(buf, sizeof buf, "objective_bits: %.12g\n", sol.objective);
    os << buf;
    os << "bcd_iterations: " << sol.iterations << "\n";
    for (const auto &r : sol.history)
    {
        std::snprintf(buf, sizeof buf,
                      "iteration %d: resources %.12g beamforming %.12g trajectory %.12g (sweeps %d, sca %d, rate audit "
                      "violations %d)\n",
                      r.iteration, r.after_resources, r.after_beamforming, r.after_trajectory, r.beamforming_sweeps,
                      r.sca_iterations, r.rate_audit_violations);
        os << buf;
    }
    os << "monotonicity_audit: " << (sol.audit.passed() ? "pass" : "fail") << "\n";
    for (const auto &v : sol.audit.violations)
    {
        std::snprintf(buf, sizeof buf, "  iteration %d stage %s relative drop %.3g\n", v.iteration, v.stage.c_str(), v.drop);
        os << buf;
    }
    const auto viol = check_solution(sc, sol, 1e-6);
    os << "feasibility: " << (viol.empty() ? "pass" : "fail") << "\n";
    for (const auto &v : viol)
    {
        std::snprintf(buf, sizeof buf, "  %s excess %.3g relative %.3g\n", v.name.c_str(), v.excess, v.relative);
        os << buf;
    }
    return os.str();
}

} // namespace uavris
