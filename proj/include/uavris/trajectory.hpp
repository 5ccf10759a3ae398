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

// Trajectory block: successive convex approximation over the horizontal UAV path.
// Pathloss powers are replaced by slack variables x (RIS-UE) and y (BS-RIS) bounded
// below by cone constraints; rate and harvested energy are linearised in the slacks.

#pragma once

#include "beamforming.hpp"
#include "channel.hpp"
#include "csv.hpp"
#include "cvx/solver.hpp"
#include "link.hpp"
#include "resource.hpp"
#include "scenario.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace uavris {

// Straight flight q1 -> above the BS -> qT, falling back to the direct line when the
// detour is too long. The corner is a sample point when both legs fit the speed limit.
inline Trajectory initial_trajectory(const Scenario &sc)
{
    const Vec3 a = sc.q1, c = sc.qT, b = sc.at_altitude(sc.q0.x(), sc.q0.y());
    const int steps = sc.T - 1;
    const double reach = steps * sc.step_limit();
    const double l1 = (b - a).norm(), l2 = (c - b).norm();
    Trajectory Q;
    Q.q.reserve(static_cast<std::size_t>(sc.T));
    auto line = [&](const Vec3 &from, const Vec3 &to, int n) {
        for (int i = 0; i < n; ++i) Q.q.push_back(from + (to - from) * (static_cast<double>(i) / n));
    };
    if (l1 + l2 <= reach)
    {
        if (l1 + l2 == 0.0)
        {
            Q.q.assign(static_cast<std::size_t>(sc.T), a);
            return Q;
        }
        const int guess = static_cast<int>(std::lround(steps * l1 / (l1 + l2)));
        for (int n1 : {guess, guess - 1, guess + 1})
        {
            const int n2 = steps - n1;
            if (n1 < 0 || n2 < 0 || (n1 == 0 && l1 > 0) || (n2 == 0 && l2 > 0)) continue;
            if ((n1 > 0 && l1 / n1 > sc.step_limit()) || (n2 > 0 && l2 / n2 > sc.step_limit())) continue;
            line(a, b, n1);
            line(b, c, n2);
            Q.q.push_back(c);
            return Q;
        }
        // constant speed along the two legs
        for (int i = 0; i <= steps; ++i)
        {
            const double s = (l1 + l2) * i / steps;
            Q.q.push_back(s <= l1 ? Vec3(a + (b - a) * (s / l1)) : Vec3(b + (c - b) * ((s - l1) / l2)));
        }
        return Q;
    }
    if ((c - a).norm() > reach) throw InfeasibleError("endpoints unreachable within T slots at V_max");
    line(a, c, steps);
    Q.q.push_back(c);
    return Q;
}

// A bound of the form value + dx (x - x0) + dy (y - y0).
struct AffineBound
{
    double value = 0.0, dx = 0.0, dy = 0.0, x0 = 1.0, y0 = 1.0;

    double operator()(double x, double y) const { return value + dx * (x - x0) + dy * (y - y0); }
};

namespace detail {

// Gain |direct|^2 + 2|cross| h0 / sqrt(xy) + |reflected|^2 h0^2 / (xy) and its slack gradient.
struct GainSlope
{
    double g, gx, gy;
};

inline GainSlope gain_slope(double direct_sq, double cross, double reflected_sq, double h0, double x, double y)
{
    if (!(x > 0) || !(y > 0)) throw std::invalid_argument("expansion point must be strictly positive");
    const double s = 1.0 / std::sqrt(x * y);
    const double g = direct_sq + 2.0 * cross * h0 * s + reflected_sq * h0 * h0 * s * s;
    const double common = -(cross * h0 * s + reflected_sq * h0 * h0 * s * s);
    return {g, common / x, common / y};
}

} // namespace detail

// First-order expansion of the aligned rate in the slacks at (x0, y0).
inline AffineBound taylor_rate_bound(const Scenario &sc, const LinkCoefficients &c, double x0, double y0, double b,
                                     double P)
{
    const auto gs = detail::gain_slope(std::norm(c.A), std::abs(c.B), std::norm(c.C), sc.h0, x0, y0);
    AffineBound r{rate_bits(sc, gs.g, b, P), 0.0, 0.0, x0, y0};
    if (b <= 0 || P <= 0 || gs.g <= 0) return r;
    const double snr = P / sc.sigma2_B;
    const double scale = sc.B * sc.delta_t * b / std::numbers::ln2 * snr / (1.0 + snr * gs.g);
    r.dx = scale * gs.gx;
    r.dy = scale * gs.gy;
    return r;
}

// First-order expansion of the aligned harvested energy; a global lower bound because the gain is convex in the slacks.
inline AffineBound taylor_energy_bound(const Scenario &sc, const LinkCoefficients &c, double x0, double y0, double a)
{
    const auto gs = detail::gain_slope(std::norm(c.D), std::abs(c.F), std::norm(c.G), sc.h0, x0, y0);
    if (a <= 0) return {0.0, 0.0, 0.0, x0, y0};
    const double k = sc.eta_0 * sc.delta_t * a;
    return {k * gs.g, k * gs.gx, k * gs.gy, x0, y0};
}

// Pathloss powers at a trajectory: x(k,t) = d_R2U^alpha_RU, y(t) = d_B2R^alpha_BR.
struct SlackPoint
{
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

inline SlackPoint slack_point(const Scenario &sc, const ChannelState &ch)
{
    SlackPoint s{Eigen::MatrixXd(sc.K, sc.T), Eigen::VectorXd(sc.T)};
    for (int t = 0; t < sc.T; ++t)
    {
        s.y[t] = std::pow(ch.d_B2R[static_cast<std::size_t>(t)], sc.alpha_BR);
        for (int k = 0; k < sc.K; ++k) s.x(k, t) = std::pow(ch.d_R2U[ch.kt(k, t)], sc.alpha_RU);
    }
    return s;
}

struct TrajectoryBounds
{
    std::vector<AffineBound> rate, energy; // k*T + t
};

inline TrajectoryBounds trajectory_bounds(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan,
                                          const ResourceSchedule &X, const SlackPoint &s)
{
    TrajectoryBounds tb;
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto c = trajectory_coefficients(ch, plan, k, t);
            const auto i = plan.kt(k, t);
            const double b = plan.active_upload[i] ? X.b(k, t) : 0.0;
            const double a = plan.active_wpt[i] ? X.a(k, t) : 0.0;
            tb.rate.push_back(taylor_rate_bound(sc, c, s.x(k, t), s.y[t], b, X.P(k, t)));
            tb.energy.push_back(taylor_energy_bound(sc, c, s.x(k, t), s.y[t], a));
        }
    return tb;
}

struct TrajectoryProgram
{
    cvx::Program prog;
    std::vector<int> qx, qy; // per slot
    std::vector<int> x;      // k*T + t, -1 when the slack does not enter any bound
    std::vector<int> y;      // per slot, -1 when unused
    double constant = 0.0;   // objective part independent of the trajectory
};

namespace detail {

inline cvx::AffineRow offset_row(int v, double origin) { return {{{v, 1.0}}, -origin}; }

inline void add_lower_pathloss(cvx::Program &prog, std::string name, int slack, int qx, int qy, const Vec3 &node,
                               double height, double alpha)
{
    std::vector<cvx::AffineRow> rows{offset_row(qx, node.x()), offset_row(qy, node.y()), {{}, height - node.z()}};
    cvx::Expr e;
    if (alpha == 2.0) e.add(cvx::SquaredNorm{std::move(rows), 1.0}).add(slack, -1.0);
    else e.add(cvx::Norm{std::move(rows), 1.0}).add(cvx::Root{slack, alpha, -1.0});
    prog.add_le(std::move(name), std::move(e));
}

inline void add_if_free(cvx::Program &prog, std::string name, cvx::Expr e)
{
    for (int v : e.vars())
        if (!prog.vars[static_cast<std::size_t>(v)].fixed())
        {
            prog.add_le(std::move(name), std::move(e));
            return;
        }
}

} // namespace detail

// Convex surrogate at trajectory Q (channels ch, beams plan, fixed resources X).
// With causality = false the energy and upload-credit constraints are omitted.
inline TrajectoryProgram build_p7(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan,
                                  const ResourceSchedule &X, const Trajectory &Q, Scheme scheme, bool causality = true)
{
    TrajectoryProgram tp;
    auto &prog = tp.prog;
    const auto s = slack_point(sc, ch);
    const auto tb = trajectory_bounds(sc, ch, plan, X, s);
    const double inflate = 1.0 + 1e-9;

    for (int t = 0; t < sc.T; ++t)
    {
        const bool end = t == 0 || t == sc.T - 1;
        const auto &q = Q.q[static_cast<std::size_t>(t)];
        const auto ts = std::to_string(t);
        tp.qx.push_back(end ? prog.fixed_var("qx[" + ts + "]", q.x()) : prog.add_var("qx[" + ts + "]", -cvx::inf, cvx::inf, q.x()));
        tp.qy.push_back(end ? prog.fixed_var("qy[" + ts + "]", q.y()) : prog.add_var("qy[" + ts + "]", -cvx::inf, cvx::inf, q.y()));
    }
    tp.x.assign(static_cast<std::size_t>(sc.K) * sc.T, -1);
    tp.y.assign(static_cast<std::size_t>(sc.T), -1);
    for (int t = 0; t < sc.T; ++t)
    {
        bool any = false;
        for (int k = 0; k < sc.K; ++k)
        {
            const auto i = static_cast<std::size_t>(k) * sc.T + t;
            const bool used = tb.rate[i].dx != 0 || tb.energy[i].dx != 0;
            any = any || tb.rate[i].dy != 0 || tb.energy[i].dy != 0;
            if (!used) continue;
            const auto name = detail::idx("x", k, t);
            tp.x[i] = prog.add_var(name, 0.0, cvx::inf, s.x(k, t) * inflate);
            detail::add_lower_pathloss(prog, "cone_" + name, tp.x[i], tp.qx[t], tp.qy[t], sc.q[static_cast<std::size_t>(k)],
                                       sc.z(), sc.alpha_RU);
        }
        if (!any) continue;
        const auto name = "y[" + std::to_string(t) + "]";
        tp.y[t] = prog.add_var(name, 0.0, cvx::inf, s.y[t] * inflate);
        detail::add_lower_pathloss(prog, "cone_" + name, tp.y[t], tp.qx[t], tp.qy[t], sc.q0, sc.z(), sc.alpha_BR);
    }

    // adds sign * bound(x, y) to e
    auto add_bound = [&](cvx::Expr &e, const AffineBound &b, int k, int t, double sign) {
        const auto i = static_cast<std::size_t>(k) * sc.T + t;
        e.add(sign * (b.value - b.dx * b.x0 - b.dy * b.y0));
        if (b.dx != 0) e.add(tp.x[i], sign * b.dx);
        if (b.dy != 0) e.add(tp.y[t], sign * b.dy);
    };

    for (int k = 0; k < sc.K; ++k)
    {
        const double lam = sc.lambda[static_cast<std::size_t>(k)];
        const auto cm = compression_model(sc, scheme, k);
        // cumulative causality in lifted form: balance_t - balance_{t-1} + use_t - bound_t <= 0,
        // with a balance variable only for slots that touch the balance
        struct Balance
        {
            int prev = -1;
            double surplus = 0.0;
        } energy, credit;
        auto step_balance = [&](Balance &bal, const char *name, int t, double use, const AffineBound &b) {
            bal.surplus += b.value - use;
            if (use == 0 && b.value == 0 && b.dx == 0 && b.dy == 0) return;
            // the running surplus is the only balance feasible for every slot at the expansion point
            const int v = prog.add_var(detail::idx(name, k, t), 0.0, cvx::inf, std::max(bal.surplus, 0.0));
            cvx::Expr e;
            e.add(v, 1.0).add(use);
            if (bal.prev >= 0) e.add(bal.prev, -1.0);
            add_bound(e, b, k, t, -1.0);
            prog.add_le(detail::idx(name, k, t), std::move(e));
            bal.prev = v;
        };
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = static_cast<std::size_t>(k) * sc.T + t;
            add_bound(prog.objective, tb.rate[i], k, t, lam);
            if (cm.enabled) tp.constant += lam * cm.saved_bits_per_f * X.f(k, t);
            if (!causality) continue;
            step_balance(energy, "energy", t, compression_energy(X.f(k, t), sc) + sc.delta_t * X.b(k, t) * X.P(k, t),
                         tb.energy[i]);
            if (cm.enabled) step_balance(credit, "rate", t, cm.uploaded_bits_per_f * X.f(k, t), tb.rate[i]);
        }
    }
    prog.objective.add(tp.constant);

    const double v2 = sc.step_limit() * sc.step_limit();
    for (int t = 0; t + 1 < sc.T; ++t)
    {
        cvx::Expr e;
        e.add(cvx::SquaredNorm{{{{{tp.qx[t + 1], 1.0}, {tp.qx[t], -1.0}}, 0.0}, {{{tp.qy[t + 1], 1.0}, {tp.qy[t], -1.0}}, 0.0}}, 1.0})
            .add(-v2);
        detail::add_if_free(prog, "speed[" + std::to_string(t) + "]", std::move(e));
    }
    return tp;
}

inline Trajectory extract_trajectory(const Scenario &sc, const TrajectoryProgram &tp, const std::vector<double> &x)
{
    Trajectory Q;
    for (int t = 0; t < sc.T; ++t)
        Q.q.push_back(sc.at_altitude(x[static_cast<std::size_t>(tp.qx[t])], x[static_cast<std::size_t>(tp.qy[t])]));
    return Q;
}

struct ScaIteration
{
    int iteration = 0;
    double surrogate = 0.0;      // surrogate optimum of the convex subproblem
    double true_objective = 0.0; // weighted raw bits at the accepted trajectory
    double slack_gap = 0.0;      // objective lost to loose slacks, relative to the surrogate
    double step = 0.0;           // accepted fraction of the move toward the subproblem solution
    int rate_audit_samples = 0;
    int rate_audit_violations = 0;
    int energy_audit_violations = 0;
    cvx::Status solver_status = cvx::Status::optimal;
    int newton_steps = 0;
};

struct ScaResult
{
    Trajectory Q;
    BeamformingPlan plan; // beams and phases matched to Q
    std::vector<ScaIteration> log;
    int iterations = 0;
    bool converged = false;
};

struct BoundAudit
{
    int samples = 0, rate_violations = 0, energy_violations = 0;
};

// Samples slack points within +-50% of the expansion point and compares the true aligned
// forms with their linearisations.
inline BoundAudit audit_bounds(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan,
                               const ResourceSchedule &X, int samples, std::uint64_t seed)
{
    BoundAudit out;
    const auto s = slack_point(sc, ch);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> f(0.5, 1.5);
    std::uniform_int_distribution<int> pick_k(0, sc.K - 1), pick_t(0, sc.T - 1);
    for (int i = 0; i < samples; ++i)
    {
        const int k = pick_k(rng), t = pick_t(rng);
        const auto c = trajectory_coefficients(ch, plan, k, t);
        const double x0 = s.x(k, t), y0 = s.y[t], x = x0 * f(rng), y = y0 * f(rng);
        const double b = X.b(k, t), P = X.P(k, t), a = X.a(k, t);
        const auto rb = taylor_rate_bound(sc, c, x0, y0, b, P);
        const auto eb = taylor_energy_bound(sc, c, x0, y0, a);
        const double R = aligned_rate_slack(sc, c, x, y, b, P), E = aligned_energy_slack(sc, c, x, y, a);
        ++out.samples;
        if (R < rb(x, y) - 1e-12 * std::abs(R)) ++out.rate_violations;
        if (E < eb(x, y) - 1e-12 * std::abs(E)) ++out.energy_violations;
    }
    return out;
}

namespace detail {

inline double relative_change(double now, double before)
{
    const double scale = std::max(std::abs(now), std::abs(before));
    return scale > 0 ? std::abs(now - before) / scale : 0.0;
}

// Objective lost to slacks lying above the pathloss powers of the trajectory, relative to the surrogate optimum.
inline double slack_objective_gap(const Scenario &sc, const TrajectoryProgram &tp, const std::vector<double> &x,
                                  const Trajectory &Q, double surrogate)
{
    std::vector<double> weight(tp.prog.vars.size(), 0.0);
    for (const auto &term : tp.prog.objective.linear) weight[static_cast<std::size_t>(term.var)] += term.coef;
    double lost = 0.0;
    auto add = [&](int v, double d) {
        if (v >= 0) lost += std::abs(weight[static_cast<std::size_t>(v)]) * std::max(0.0, x[static_cast<std::size_t>(v)] - d);
    };
    for (int t = 0; t < sc.T; ++t)
    {
        const Vec3 &q = Q.q[static_cast<std::size_t>(t)];
        for (int k = 0; k < sc.K; ++k)
            add(tp.x[static_cast<std::size_t>(k) * sc.T + t], std::pow((q - sc.q[static_cast<std::size_t>(k)]).norm(), sc.alpha_RU));
        add(tp.y[static_cast<std::size_t>(t)], std::pow((q - sc.q0).norm(), sc.alpha_BR));
    }
    return lost / std::max(std::abs(surrogate), 1e-300);
}

} // namespace detail

// Successive convex approximation of the trajectory for fixed resources and beams. The
// first subproblem omits the causality constraints. Every candidate is checked through the
// link models with beams and phases re-matched to the moved surface and accepted only if the
// schedule stays feasible and the weighted raw bits do not drop; otherwise the move is halved.
inline ScaResult sca_trajectory(const Scenario &sc, const BeamformingPlan &plan, const ResourceSchedule &X, Scheme scheme,
                                const Trajectory &Q_init, std::uint64_t audit_seed = 1)
{
    ScaResult res;
    res.Q = Q_init;
    res.plan = plan;
    auto ch = assemble_channels(sc, res.Q);
    realign_phases(ch, res.plan);
    double current = weighted_raw_bits(sc, ch, res.plan, X, scheme);
    constexpr double accept_tol = 1e-9;
    if (!schedule_violations(sc, ch, res.plan, X, scheme, accept_tol).empty())
        throw InfeasibleError("trajectory start violates the schedule constraints");
    res.log.push_back({0, current, current, 0.0, 0.0, 0, 0, 0});

    cvx::SolveOptions opt;
    opt.tol = sc.tol_solver;
    for (int l = 1; l <= sc.i_max_sca; ++l)
    {
        ScaIteration it;
        it.iteration = l;
        const auto audit = audit_bounds(sc, ch, res.plan, X, 1000, audit_seed + static_cast<std::uint64_t>(l));
        it.rate_audit_samples = audit.samples;
        it.rate_audit_violations = audit.rate_violations;
        it.energy_audit_violations = audit.energy_violations;

        const auto tp = build_p7(sc, ch, res.plan, X, res.Q, scheme, l > 1);
        const auto sol = cvx::solve(tp.prog, opt);
        res.iterations = l;
        it.solver_status = sol.status;
        it.newton_steps = sol.newton_steps;
        if (sol.status == cvx::Status::infeasible)
        {
            it.surrogate = current;
            it.true_objective = current;
            res.log.push_back(it);
            res.converged = true;
            break;
        }
        it.surrogate = sol.objective;
        const auto cand = extract_trajectory(sc, tp, sol.x);
        it.slack_gap = detail::slack_objective_gap(sc, tp, sol.x, cand, sol.objective);

        double accepted = current, step = 0.0;
        for (double tau = 1.0; tau >= 1.0 / 1024; tau *= 0.5)
        {
            Trajectory Qt;
            for (int t = 0; t < sc.T; ++t)
            {
                const auto i = static_cast<std::size_t>(t);
                Qt.q.push_back(res.Q.q[i] + tau * (cand.q[i] - res.Q.q[i]));
            }
            ChannelState cht;
            try
            {
                cht = assemble_channels(sc, Qt);
            }
            catch (const GeometryError &)
            {
                continue;
            }
            auto pt = alternating_beamforming(sc, cht, X, res.plan).plan;
            const double v = weighted_raw_bits(sc, cht, pt, X, scheme);
            if (v < current || !schedule_violations(sc, cht, pt, X, scheme, accept_tol).empty()) continue;
            accepted = v;
            step = tau;
            res.Q = std::move(Qt);
            res.plan = std::move(pt);
            ch = std::move(cht);
            break;
        }
        it.step = step;
        it.true_objective = accepted;
        res.log.push_back(it);
        const double change = detail::relative_change(accepted, current);
        current = accepted;
        if (l > 1 && (step == 0.0 || change < sc.tol_sca))
        {
            res.converged = true;
            break;
        }
    }
    return res;
}

inline CsvTable sca_log_table(const ScaResult &r)
{
    CsvTable t({"iteration", "surrogate_objective", "true_objective", "slack_gap", "step", "rate_audit_samples",
                "rate_audit_violations", "energy_audit_violations", "solver_status", "newton_steps"});
    for (const auto &it : r.log)
        t.add_row({static_cast<long long>(it.iteration), it.surrogate, it.true_objective, it.slack_gap, it.step,
                   static_cast<long long>(it.rate_audit_samples), static_cast<long long>(it.rate_audit_violations),
                   static_cast<long long>(it.energy_audit_violations), std::string(cvx::to_string(it.solver_status)),
                   static_cast<long long>(it.newton_steps)});
    return t;
}

} // namespace uavris
