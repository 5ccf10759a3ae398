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

// Resource block: CPU frequencies, upload powers and WPT/upload time shares for fixed
// beams and trajectory. Cumulative causality constraints are lifted into per-slot
// balance recursions (stored energy e, unspent upload credit r), which keeps the
// Newton systems banded.

#pragma once

#include "beamforming.hpp"
#include "channel.hpp"
#include "cvx/solver.hpp"
#include "link.hpp"
#include "scenario.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavris {

class InfeasibleError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Bits per unit of CPU frequency for one UE under a scheme.
struct CompressionModel
{
    bool enabled = false;
    double ratio = 1.0;          // compressed/raw size
    double raw_bits_per_f = 0.0; // raw bits represented per unit f (lossy includes the sqrt loss factor)
    double uploaded_bits_per_f = 0.0;
    double saved_bits_per_f = 0.0; // (1 - ratio) * raw_bits_per_f, objective weight before lambda
};

inline CompressionModel compression_model(const Scenario &sc, Scheme scheme, int k)
{
    CompressionModel m;
    if (scheme == Scheme::none) return m;
    const double kappa = scheme == Scheme::lossless ? sc.kappa[static_cast<std::size_t>(k)]
                                                    : sc.kappa_bar[static_cast<std::size_t>(k)];
    if (kappa >= 1.0) return m;
    const double per_f = lossless_compressed_bits(1.0, kappa, sc);
    m.enabled = true;
    m.ratio = kappa;
    m.raw_bits_per_f = scheme == Scheme::lossy ? std::sqrt(kappa) * per_f : per_f;
    m.uploaded_bits_per_f = kappa * per_f;
    m.saved_bits_per_f = (1.0 - kappa) * m.raw_bits_per_f;
    return m;
}

// Raw bits delivered by one UE in one slot: uploaded bits plus what compression saved.
inline double slot_raw_bits(const Scenario &sc, Scheme scheme, int k, double R, double f)
{
    const auto m = compression_model(sc, scheme, k);
    return R + (m.enabled ? m.saved_bits_per_f * f : 0.0);
}

// Fixed-plan link coefficients: harvested energy per unit WPT share and upload SNR gain.
struct SlotGains
{
    Eigen::MatrixXd harvest; // J per unit a
    Eigen::MatrixXd upload;  // |effective channel^H u|^2
};

inline SlotGains slot_gains(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan)
{
    SlotGains g{Eigen::MatrixXd::Zero(sc.K, sc.T), Eigen::MatrixXd::Zero(sc.K, sc.T)};
    for (int k = 0; k < sc.K; ++k)
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            if (plan.active_wpt[i]) g.harvest(k, t) = harvested_energy(sc, ch, plan.w[i], plan.theta[i], k, t, 1.0);
            if (plan.active_upload[i]) g.upload(k, t) = effective_gain(ch, plan.u[i], plan.theta_bar[i], k, t);
        }
    return g;
}

struct ResourceProgram
{
    cvx::Program prog;
    Scheme scheme = Scheme::lossless;
    int K = 0, T = 0;
    SlotGains gains;
    // variable ids, K x T row-major (k*T + t); -1 when absent
    std::vector<int> f, p, a, b, e, r;

    std::size_t kt(int k, int t) const { return static_cast<std::size_t>(k) * T + t; }
};

namespace detail {

// Adds the constraint unless every variable in it is fixed, in which case it must already hold strictly or as equality.
inline void add_or_check(cvx::Program &prog, std::string name, cvx::Expr e)
{
    for (int v : e.vars())
        if (!prog.vars[static_cast<std::size_t>(v)].fixed())
        {
            prog.add_le(std::move(name), std::move(e));
            return;
        }
    const auto x = prog.start_point();
    if (e.value(x) > 0) throw InfeasibleError("constraint '" + name + "' violated by fixed variables");
}

inline std::string idx(const char *base, int k, int t)
{
    return std::string(base) + "[" + std::to_string(k) + "," + std::to_string(t) + "]";
}

} // namespace detail

// Builds the resource program for a scheme. The start point is strictly feasible.
inline ResourceProgram build_resource_program(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan,
                                              Scheme scheme)
{
    using cvx::Expr;
    ResourceProgram rp;
    rp.scheme = scheme;
    rp.K = sc.K;
    rp.T = sc.T;
    rp.gains = slot_gains(sc, ch, plan);
    auto &prog = rp.prog;
    const std::size_t n = static_cast<std::size_t>(sc.K) * sc.T;
    rp.f.assign(n, -1);
    rp.p.assign(n, -1);
    rp.a.assign(n, -1);
    rp.b.assign(n, -1);
    rp.e.assign(n, -1);
    rp.r.assign(n, -1);

    const double dt = sc.delta_t;
    const double up_share = std::min(1.0, 1.0 - sc.gamma);
    const double Bdt = sc.B * dt;
    const double comp_energy = sc.gamma * dt * sc.gamma_c; // J per f^3

    for (int k = 0; k < sc.K; ++k)
    {
        const auto cm = compression_model(sc, scheme, k);
        const double lam = sc.lambda[static_cast<std::size_t>(k)];
        double stored = 0.0, credit_prev = 0.0;
        bool harvested = false, upload_seen = false;
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = rp.kt(k, t);
            const double H = rp.gains.harvest(k, t);
            const double c = rp.gains.upload(k, t) / sc.sigma2_B;
            harvested = harvested || H > 0;
            const bool p_free = harvested && c > 0 && up_share > 0;
            upload_seen = upload_seen || p_free;
            const bool f_free = cm.enabled && harvested && upload_seen;

            // strictly interior start, built forward in time
            const double a0 = H > 0 ? 0.4 / sc.K : 0.0;
            const double b0 = p_free ? 0.4 * up_share / sc.K : 0.0;
            const double budget = stored + H * a0;
            const double spend = (p_free || f_free) ? 0.25 * budget : 0.0;
            double p0 = 0.0, f0 = 0.0;
            if (p_free) p0 = (f_free ? 0.5 : 1.0) * spend / dt;
            if (f_free) f0 = std::cbrt((p_free ? 0.5 : 1.0) * spend / comp_energy);
            const double R0 = p_free ? rate_bits_perspective(sc, rp.gains.upload(k, t), b0, p0) : 0.0;
            const double credit = credit_prev + R0;
            if (f_free) f0 = std::min(f0, 0.25 * credit / cm.uploaded_bits_per_f);
            const double spent = dt * p0 + comp_energy * f0 * f0 * f0;
            const double e0 = 0.5 * (budget - spent);
            const double r0 = f_free || upload_seen ? 0.5 * (credit - (f_free ? cm.uploaded_bits_per_f * f0 : 0.0)) : 0.0;

            rp.a[i] = H > 0 ? prog.add_var(detail::idx("a", k, t), 0.0, 1.0, a0) : prog.fixed_var(detail::idx("a", k, t), 0.0);
            rp.b[i] = p_free ? prog.add_var(detail::idx("b", k, t), 0.0, 1.0, b0) : prog.fixed_var(detail::idx("b", k, t), 0.0);
            rp.p[i] = p_free ? prog.add_var(detail::idx("p", k, t), 0.0, cvx::inf, p0) : prog.fixed_var(detail::idx("p", k, t), 0.0);
            rp.f[i] = f_free ? prog.add_var(detail::idx("f", k, t), 0.0, cvx::inf, f0) : prog.fixed_var(detail::idx("f", k, t), 0.0);
            rp.e[i] = harvested ? prog.add_var(detail::idx("e", k, t), 0.0, cvx::inf, e0) : prog.fixed_var(detail::idx("e", k, t), 0.0);
            if (cm.enabled)
                rp.r[i] = upload_seen ? prog.add_var(detail::idx("r", k, t), 0.0, cvx::inf, r0)
                                      : prog.fixed_var(detail::idx("r", k, t), 0.0);
            stored = harvested ? e0 : 0.0;
            credit_prev = upload_seen ? r0 : 0.0;

            // objective: weighted raw bits
            if (p_free) prog.objective.add(cvx::PerspectiveLog{rp.b[i], rp.p[i], c, lam * Bdt});
            if (f_free) prog.objective.add(rp.f[i], lam * cm.saved_bits_per_f);

            // energy balance: e_t - e_{t-1} - H a_t + dt p_t + comp f_t^3 <= 0
            Expr en;
            en.add(rp.e[i], 1.0);
            if (t > 0) en.add(rp.e[rp.kt(k, t - 1)], -1.0);
            en.add(rp.a[i], -H).add(rp.p[i], dt);
            if (f_free) en.add(cvx::Cube{rp.f[i], comp_energy});
            detail::add_or_check(prog, detail::idx("energy", k, t), std::move(en));

            // upload credit: r_t - r_{t-1} - R_t + uploaded compressed bits <= 0
            if (cm.enabled)
            {
                Expr rc;
                rc.add(rp.r[i], 1.0);
                if (t > 0) rc.add(rp.r[rp.kt(k, t - 1)], -1.0);
                if (p_free) rc.add(cvx::PerspectiveLog{rp.b[i], rp.p[i], c, -Bdt});
                rc.add(rp.f[i], cm.uploaded_bits_per_f);
                detail::add_or_check(prog, detail::idx("rate", k, t), std::move(rc));
            }
        }
    }

    for (int t = 0; t < sc.T; ++t)
    {
        Expr tdm, up;
        for (int k = 0; k < sc.K; ++k)
        {
            tdm.add(rp.a[rp.kt(k, t)], 1.0).add(rp.b[rp.kt(k, t)], 1.0);
            up.add(rp.b[rp.kt(k, t)], 1.0);
        }
        tdm.add(-1.0);
        up.add(-(1.0 - sc.gamma));
        detail::add_or_check(prog, "tdm[" + std::to_string(t) + "]", std::move(tdm));
        detail::add_or_check(prog, "upload_share[" + std::to_string(t) + "]", std::move(up));
    }
    return rp;
}

inline ResourceProgram build_p3(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan)
{
    return build_resource_program(sc, ch, plan, Scheme::lossless);
}

inline ResourceProgram build_lossy(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan)
{
    return build_resource_program(sc, ch, plan, Scheme::lossy);
}

// P = p / b where b exceeds the threshold, else 0.
inline ResourceSchedule recover_power(ResourceSchedule s, double threshold = 1e-9)
{
    for (Eigen::Index k = 0; k < s.b.rows(); ++k)
        for (Eigen::Index t = 0; t < s.b.cols(); ++t)
            s.P(k, t) = s.b(k, t) > threshold ? s.p(k, t) / s.b(k, t) : 0.0;
    return s;
}

// Cutting residual uploads in recover_power can leave compressed bits without upload credit.
// Scales each UE's compression by the largest factor that keeps every prefix of compressed
// bits within the uploaded bits; energy use only drops.
inline ResourceSchedule limit_compression_to_uploads(ResourceSchedule s, const Scenario &sc, Scheme scheme,
                                                     const SlotGains &g)
{
    for (int k = 0; k < static_cast<int>(s.f.rows()); ++k)
    {
        const auto cm = compression_model(sc, scheme, k);
        if (!cm.enabled) continue;
        double compressed = 0.0, uploaded = 0.0, factor = 1.0;
        for (int t = 0; t < static_cast<int>(s.f.cols()); ++t)
        {
            uploaded += rate_bits(sc, g.upload(k, t), s.b(k, t), s.P(k, t));
            compressed += cm.uploaded_bits_per_f * s.f(k, t);
            if (compressed > uploaded) factor = std::min(factor, uploaded / compressed);
        }
        if (factor < 1.0) s.f.row(k) *= factor;
    }
    return s;
}

struct ResourceResult
{
    ResourceSchedule schedule;
    cvx::Solution solution;
};

inline ResourceResult solve_resources(const ResourceProgram &rp, const Scenario &sc)
{
    cvx::SolveOptions opt;
    opt.tol = sc.tol_solver;
    opt.iter_cap = 600;
    ResourceResult res;
    res.solution = cvx::solve(rp.prog, opt);
    if (res.solution.status == cvx::Status::infeasible) throw InfeasibleError("resource program infeasible");
    auto s = ResourceSchedule::zeros(rp.K, rp.T);
    const auto &x = res.solution.x;
    for (int k = 0; k < rp.K; ++k)
        for (int t = 0; t < rp.T; ++t)
        {
            const auto i = rp.kt(k, t);
            s.f(k, t) = x[static_cast<std::size_t>(rp.f[i])];
            s.p(k, t) = x[static_cast<std::size_t>(rp.p[i])];
            s.a(k, t) = x[static_cast<std::size_t>(rp.a[i])];
            s.b(k, t) = x[static_cast<std::size_t>(rp.b[i])];
        }
    res.schedule = limit_compression_to_uploads(recover_power(std::move(s)), sc, rp.scheme, rp.gains);
    return res;
}

// Weighted raw bits of a complete design, evaluated through the link models.
inline double weighted_raw_bits(const Scenario &sc, const ChannelState &ch, const BeamformingPlan &plan,
                                const ResourceSchedule &x, Scheme scheme)
{
    double total = 0.0;
    for (int k = 0; k < sc.K; ++k)
    {
        double user = 0.0;
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            const double R = plan.active_upload[i] ? uplink_bits(sc, ch, plan.u[i], plan.theta_bar[i], k, t, x.b(k, t), x.P(k, t)) : 0.0;
            user += slot_raw_bits(sc, scheme, k, R, x.f(k, t));
        }
        total += sc.lambda[static_cast<std::size_t>(k)] * user;
    }
    return total;
}

struct ConstraintViolation
{
    std::string name;
    double excess;   // amount by which the constraint is exceeded
    double relative; // excess over the constraint's natural scale
};

// Re-evaluates schedule constraints through the link models; a violation is reported when the
// excess exceeds tol in both absolute units of the constraint scale and relative terms.
inline std::vector<ConstraintViolation> schedule_violations(const Scenario &sc, const ChannelState &ch,
                                                            const BeamformingPlan &plan, const ResourceSchedule &x,
                                                            Scheme scheme, double tol)
{
    std::vector<ConstraintViolation> out;
    auto report = [&](std::string name, double lhs, double rhs) {
        const double excess = lhs - rhs;
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        if (excess > tol * std::max(scale, 0.0) && excess > 0)
            out.push_back({std::move(name), excess, scale > 0 ? excess / scale : excess});
    };
    for (int k = 0; k < sc.K; ++k)
    {
        const auto cm = compression_model(sc, scheme, k);
        double spent = 0.0, harvested = 0.0, compressed = 0.0, uploaded = 0.0;
        for (int t = 0; t < sc.T; ++t)
        {
            const auto i = plan.kt(k, t);
            for (const auto *m : {&x.f, &x.P, &x.a, &x.b})
                if ((*m)(k, t) < 0) out.push_back({detail::idx("nonnegativity", k, t), -(*m)(k, t), 1.0});
            if (!cm.enabled && x.f(k, t) > 0) out.push_back({detail::idx("no_compression", k, t), x.f(k, t), 1.0});
            if (plan.active_wpt[i]) harvested += harvested_energy(sc, ch, plan.w[i], plan.theta[i], k, t, x.a(k, t));
            spent += compression_energy(x.f(k, t), sc) + x.b(k, t) * sc.delta_t * x.P(k, t);
            report(detail::idx("energy_causality", k, t), spent, harvested);
            if (cm.enabled)
            {
                if (plan.active_upload[i])
                    uploaded += uplink_bits(sc, ch, plan.u[i], plan.theta_bar[i], k, t, x.b(k, t), x.P(k, t));
                compressed += cm.uploaded_bits_per_f * x.f(k, t);
                report(detail::idx("rate_causality", k, t), compressed, uploaded);
            }
        }
    }
    for (int t = 0; t < sc.T; ++t)
    {
        double ab = 0.0, bs = 0.0;
        for (int k = 0; k < sc.K; ++k)
        {
            ab += x.a(k, t) + x.b(k, t);
            bs += x.b(k, t);
        }
        report("tdm[" + std::to_string(t) + "]", ab, 1.0);
        report("upload_share[" + std::to_string(t) + "]", bs, 1.0 - sc.gamma);
    }
    return out;
}

} // namespace uavris
