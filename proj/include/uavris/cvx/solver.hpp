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

// Log-barrier interior-point method with sparse Newton steps.

#pragma once

#include "program.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace uavris::cvx {

enum class Status
{
    optimal,
    max_iterations,
    infeasible
};

inline const char *to_string(Status s)
{
    switch (s)
    {
    case Status::optimal: return "optimal";
    case Status::max_iterations: return "max-iterations";
    case Status::infeasible: return "infeasible";
    }
    return "?";
}

struct SolveOptions
{
    double tol = 1e-6;     // relative duality-gap target
    int iter_cap = 400;    // total Newton steps
    double mu = 10.0;      // barrier parameter growth
    bool phase1 = true;    // search for a strictly feasible start when needed
};

struct Solution
{
    std::vector<double> x;
    double objective = 0.0;
    Status status = Status::infeasible;
    double residual = 0.0; // max relative constraint residual, <= 0 when strictly feasible
    double gap = 0.0;      // barrier duality-gap bound m/t
    int newton_steps = 0;
    int outer_iterations = 0;
};

namespace detail {

class Barrier
{
  public:
    explicit Barrier(const Program &prog) : prog_(prog)
    {
        const auto n = prog.vars.size();
        free_index_.assign(n, -1);
        for (std::size_t i = 0; i < n; ++i)
            if (!prog.vars[i].fixed())
            {
                free_index_[i] = static_cast<int>(free_.size());
                free_.push_back(static_cast<int>(i));
            }
        terms_ = static_cast<int>(prog.constraints.size());
        for (int i : free_)
        {
            const auto &v = prog.vars[static_cast<std::size_t>(i)];
            terms_ += std::isfinite(v.lo) + std::isfinite(v.hi);
        }
        cons_vars_.reserve(prog.constraints.size());
        for (const auto &c : prog.constraints) cons_vars_.push_back(c.expr.vars());
    }

    int free_count() const { return static_cast<int>(free_.size()); }
    int barrier_terms() const { return terms_; }
    const std::vector<int> &free_vars() const { return free_; }

    // +inf outside the strict interior.
    double value(const std::vector<double> &x, double t) const
    {
        double phi = 0.0;
        for (int i : free_)
        {
            const auto &v = prog_.vars[static_cast<std::size_t>(i)];
            const double xi = x[static_cast<std::size_t>(i)];
            if (std::isfinite(v.lo))
            {
                if (!(xi > v.lo)) return inf;
                phi -= std::log(xi - v.lo);
            }
            if (std::isfinite(v.hi))
            {
                if (!(xi < v.hi)) return inf;
                phi -= std::log(v.hi - xi);
            }
        }
        for (const auto &c : prog_.constraints)
        {
            const double g = c.expr.value(x);
            if (!(g < 0)) return inf;
            phi -= std::log(-g);
        }
        const double f = prog_.objective.value(x);
        if (!std::isfinite(f)) return inf;
        return phi - t * f;
    }

    // Gradient and Hessian over the free variables.
    void derivatives(const std::vector<double> &x, double t, Eigen::VectorXd &grad,
                     std::vector<Eigen::Triplet<double>> &trip) const
    {
        const auto nf = static_cast<Eigen::Index>(free_.size());
        grad = Eigen::VectorXd::Zero(nf);
        trip.clear();
        for (Eigen::Index j = 0; j < nf; ++j)
        {
            const auto &v = prog_.vars[static_cast<std::size_t>(free_[static_cast<std::size_t>(j)])];
            const double xi = x[static_cast<std::size_t>(free_[static_cast<std::size_t>(j)])];
            double d = 0.0;
            if (std::isfinite(v.lo))
            {
                const double s = xi - v.lo;
                grad[j] -= 1.0 / s;
                d += 1.0 / (s * s);
            }
            if (std::isfinite(v.hi))
            {
                const double s = v.hi - xi;
                grad[j] += 1.0 / s;
                d += 1.0 / (s * s);
            }
            trip.emplace_back(static_cast<int>(j), static_cast<int>(j), d);
        }

        // objective: additive atom curvature, scaled by -t
        for (const auto &term : prog_.objective.linear)
        {
            const int j = free_index_[static_cast<std::size_t>(term.var)];
            if (j >= 0) grad[j] -= t * term.coef;
        }
        for (const auto &a : prog_.objective.atoms)
        {
            const auto le = atom_eval(a, x);
            scatter(le.vars, -t * le.grad, -t * le.hess, grad, trip);
        }

        // constraints: -log(-g) gives grad/(-g) and hess/(-g) + grad grad^T / g^2
        for (std::size_t ci = 0; ci < prog_.constraints.size(); ++ci)
        {
            const auto &e = prog_.constraints[ci].expr;
            const auto &vars = cons_vars_[ci];
            const auto n = static_cast<Eigen::Index>(vars.size());
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
            Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
            double val = e.constant;
            for (const auto &term : e.linear)
            {
                val += term.coef * x[static_cast<std::size_t>(term.var)];
                g[local_index(vars, term.var)] += term.coef;
            }
            for (const auto &a : e.atoms)
            {
                const auto le = atom_eval(a, x);
                val += le.value;
                for (std::size_t p = 0; p < le.vars.size(); ++p)
                {
                    const int ip = local_index(vars, le.vars[p]);
                    g[ip] += le.grad[static_cast<Eigen::Index>(p)];
                    for (std::size_t q = 0; q < le.vars.size(); ++q)
                        H(ip, local_index(vars, le.vars[q])) += le.hess(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                }
            }
            const double s = -val;
            scatter(vars, g / s, H / s + g * g.transpose() / (s * s), grad, trip);
        }
    }

  private:
    void scatter(const std::vector<int> &vars, const Eigen::VectorXd &g, const Eigen::MatrixXd &H,
                 Eigen::VectorXd &grad, std::vector<Eigen::Triplet<double>> &trip) const
    {
        for (std::size_t p = 0; p < vars.size(); ++p)
        {
            const int jp = free_index_[static_cast<std::size_t>(vars[p])];
            if (jp < 0) continue;
            grad[jp] += g[static_cast<Eigen::Index>(p)];
            for (std::size_t q = 0; q < vars.size(); ++q)
            {
                const int jq = free_index_[static_cast<std::size_t>(vars[q])];
                if (jq < 0) continue;
                trip.emplace_back(jp, jq, H(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)));
            }
        }
    }

    const Program &prog_;
    std::vector<int> free_, free_index_;
    std::vector<std::vector<int>> cons_vars_;
    int terms_ = 0;
};

// Moves free variables strictly inside their bounds.
inline void interiorize(const Program &prog, std::vector<double> &x)
{
    for (std::size_t i = 0; i < prog.vars.size(); ++i)
    {
        const auto &v = prog.vars[i];
        if (v.fixed())
        {
            x[i] = v.lo;
            continue;
        }
        const bool lo = std::isfinite(v.lo), hi = std::isfinite(v.hi);
        if (lo && hi)
        {
            const double w = v.hi - v.lo;
            if (!(x[i] > v.lo && x[i] < v.hi)) x[i] = std::clamp(x[i], v.lo + 1e-3 * w, v.hi - 1e-3 * w);
        }
        else if (lo && !(x[i] > v.lo)) x[i] = v.lo + 1e-3 * std::max(1.0, std::abs(v.lo));
        else if (hi && !(x[i] < v.hi)) x[i] = v.hi - 1e-3 * std::max(1.0, std::abs(v.hi));
    }
}

inline bool strictly_feasible(const Program &prog, const std::vector<double> &x)
{
    for (const auto &c : prog.constraints)
        if (!(c.expr.value(x) < 0)) return false;
    return std::isfinite(prog.objective.value(x));
}

inline double max_relative_residual(const Program &prog, const std::vector<double> &x)
{
    double m = -inf;
    for (const auto &c : prog.constraints)
        m = std::max(m, c.expr.value(x) / std::max(c.expr.magnitude(x), 1e-300));
    return prog.constraints.empty() ? 0.0 : m;
}

// Newton centering at fixed t. Returns false when the step budget ran out.
inline bool center(const Program &prog, const Barrier &bar, std::vector<double> &x, double t, int &steps, int cap)
{
    const int nf = bar.free_count();
    const auto &free = bar.free_vars();
    Eigen::VectorXd grad;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::SparseMatrix<double> H(nf, nf);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analysed = false;

    double phi = bar.value(x, t);
    while (steps < cap)
    {
        bar.derivatives(x, t, grad, trip);
        H.setFromTriplets(trip.begin(), trip.end());

        // symmetric Jacobi scaling keeps wildly different variable units conditioned
        Eigen::VectorXd d(nf);
        for (int j = 0; j < nf; ++j)
        {
            const double hjj = H.coeff(j, j);
            d[j] = hjj > 0 && std::isfinite(hjj) ? 1.0 / std::sqrt(hjj) : 1.0;
        }
        Eigen::SparseMatrix<double> Hs = d.asDiagonal() * H * d.asDiagonal();
        const Eigen::VectorXd gs = d.cwiseProduct(grad);

        if (!analysed)
        {
            ldlt.analyzePattern(Hs);
            analysed = true;
        }
        Eigen::VectorXd dx;
        double reg = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt)
        {
            Eigen::SparseMatrix<double> Hr = Hs;
            if (reg > 0)
                for (int j = 0; j < nf; ++j) Hr.coeffRef(j, j) += reg;
            ldlt.factorize(Hr);
            if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all())
            {
                dx = -ldlt.solve(gs);
                if (dx.allFinite()) break;
            }
            dx.resize(0);
            reg = reg == 0 ? 1e-10 : reg * 100;
        }
        if (dx.size() == 0) return true; // no usable direction; treat as centred
        const double lambda2 = -gs.dot(dx);
        dx = d.cwiseProduct(dx);
        ++steps;
        if (!(lambda2 > 1e-9 * std::max(1, bar.barrier_terms()))) return true;

        // fraction-to-boundary on bounds, then backtracking on the barrier
        double step = 1.0;
        for (int j = 0; j < nf; ++j)
        {
            const auto &v = prog.vars[static_cast<std::size_t>(free[static_cast<std::size_t>(j)])];
            const double xi = x[static_cast<std::size_t>(free[static_cast<std::size_t>(j)])];
            if (dx[j] < 0 && std::isfinite(v.lo)) step = std::min(step, 0.99 * (v.lo - xi) / dx[j]);
            if (dx[j] > 0 && std::isfinite(v.hi)) step = std::min(step, 0.99 * (v.hi - xi) / dx[j]);
        }
        std::vector<double> trial = x;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls)
        {
            for (int j = 0; j < nf; ++j)
            {
                const auto i = static_cast<std::size_t>(free[static_cast<std::size_t>(j)]);
                trial[i] = x[i] + step * dx[j];
            }
            if (trial == x) return true; // step below machine resolution
            const double ph = bar.value(trial, t);
            if (std::isfinite(ph) && ph < phi && ph <= phi - 0.25 * step * lambda2)
            {
                x = trial;
                phi = ph;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) return true; // rounding floor reached
    }
    return false;
}

inline double objective_magnitude(const Program &prog, const std::vector<double> &x)
{
    double m = std::abs(prog.objective.value(x));
    for (const auto &t : prog.objective.linear) m += std::abs(t.coef * x[static_cast<std::size_t>(t.var)]);
    for (const auto &a : prog.objective.atoms)
    {
        const auto le = atom_eval(a, x);
        m += std::abs(le.value);
        for (std::size_t p = 0; p < le.vars.size(); ++p)
            m += std::abs(le.grad[static_cast<Eigen::Index>(p)] * x[static_cast<std::size_t>(le.vars[p])]);
    }
    return m;
}

inline bool objective_has_free_vars(const Program &prog)
{
    for (int v : prog.objective.vars())
        if (!prog.vars[static_cast<std::size_t>(v)].fixed()) return true;
    return false;
}

// Barrier weight balancing objective and barrier gradients in the barrier's local metric.
inline double balanced_weight(const Program &prog, const Barrier &bar, const std::vector<double> &x)
{
    Eigen::VectorXd g0, g1;
    std::vector<Eigen::Triplet<double>> trip;
    bar.derivatives(x, 0.0, g0, trip);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(g0.size());
    for (const auto &tr : trip)
        if (tr.row() == tr.col()) diag[tr.row()] += tr.value();
    bar.derivatives(x, 1.0, g1, trip);
    const Eigen::VectorXd gf = g1 - g0;
    double nb = 0.0, nf = 0.0;
    for (Eigen::Index j = 0; j < g0.size(); ++j)
    {
        const double w = diag[j] > 0 ? 1.0 / diag[j] : 1.0;
        nb += g0[j] * g0[j] * w;
        nf += gf[j] * gf[j] * w;
    }
    (void)prog;
    if (!(nf > 0)) return 1.0;
    const double t = std::sqrt(std::max(nb, 1.0) / nf);
    return std::isfinite(t) && t > 0 ? t : 1.0;
}

inline Solution barrier_solve(const Program &prog, std::vector<double> x, const SolveOptions &opt)
{
    Barrier bar(prog);
    Solution sol;
    const int m = std::max(1, bar.barrier_terms());
    const double mag0 = objective_magnitude(prog, x);
    const double tb = balanced_weight(prog, bar, x);
    double t = mag0 > 0 ? std::min(m / mag0, tb) : tb;
    bool hit_cap = false;
    for (;;)
    {
        if (!center(prog, bar, x, t, sol.newton_steps, opt.iter_cap))
        {
            hit_cap = true;
            break;
        }
        ++sol.outer_iterations;
        const double f = prog.objective.value(x);
        const double scale = std::max(std::abs(f), 1e-6 * objective_magnitude(prog, x));
        if (m / t <= opt.tol * scale || !std::isfinite(t * opt.mu)) break;
        t *= opt.mu;
    }
    sol.x = std::move(x);
    sol.objective = prog.objective.value(sol.x);
    sol.gap = m / t;
    sol.residual = max_relative_residual(prog, sol.x);
    sol.status = hit_cap ? Status::max_iterations : Status::optimal;
    return sol;
}

// Minimises the largest normalised constraint value from x0; returns whether it went negative.
inline bool phase_one(const Program &prog, std::vector<double> &x, const SolveOptions &opt, int &steps)
{
    Program aux;
    aux.vars = prog.vars;
    double smax = -inf;
    std::vector<double> w(prog.constraints.size());
    for (std::size_t i = 0; i < prog.constraints.size(); ++i)
    {
        const auto &e = prog.constraints[i].expr;
        const double g = e.value(x);
        w[i] = std::max(e.magnitude(x), 1e-300);
        smax = std::max(smax, g / w[i]);
    }
    if (!std::isfinite(smax)) return false;
    const int s = aux.add_var("phase_one_slack", -1.0, inf, smax + 1.0);
    for (std::size_t i = 0; i < prog.constraints.size(); ++i)
    {
        Expr e = prog.constraints[i].expr;
        e.add(s, -w[i]);
        aux.add_le(prog.constraints[i].name, std::move(e));
    }
    aux.objective.add(s, -1.0);
    std::vector<double> xa = x;
    xa.push_back(smax + 1.0);

    Barrier bar(aux);
    const int m = std::max(1, bar.barrier_terms());
    double t = m;
    for (int outer = 0; outer < 40; ++outer)
    {
        const bool ok = center(aux, bar, xa, t, steps, opt.iter_cap);
        if (xa.back() < -1e-3 || !ok) break;
        if (m / t < 1e-9) break;
        t *= opt.mu;
    }
    xa.pop_back();
    if (strictly_feasible(prog, xa))
    {
        x = std::move(xa);
        return true;
    }
    return false;
}

} // namespace detail

// Maximises prog.objective subject to its constraints from the variables' start values.
inline Solution solve(const Program &prog, const SolveOptions &opt = {})
{
    validate(prog);
    std::vector<double> x = prog.start_point();
    detail::interiorize(prog, x);

    int steps = 0;
    if (!detail::strictly_feasible(prog, x))
    {
        if (!opt.phase1 || !detail::phase_one(prog, x, opt, steps))
        {
            Solution sol;
            sol.x = x;
            sol.objective = prog.objective.value(x);
            sol.status = Status::infeasible;
            sol.residual = detail::max_relative_residual(prog, x);
            sol.newton_steps = steps;
            return sol;
        }
    }
    if (!detail::objective_has_free_vars(prog))
    {
        Solution sol;
        sol.x = x;
        sol.objective = prog.objective.value(x);
        sol.status = Status::optimal;
        sol.residual = detail::max_relative_residual(prog, x);
        sol.newton_steps = steps;
        return sol;
    }
    auto sol = detail::barrier_solve(prog, std::move(x), opt);
    sol.newton_steps += steps;
    return sol;
}

} // namespace uavris::cvx
