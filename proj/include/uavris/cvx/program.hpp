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

// Closed atom set for smooth convex programs:
//   maximize   concave expression
//   subject to convex expression <= 0,  lo <= v <= hi.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace uavris::cvx {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Term
{
    int var;
    double coef;
};

// Affine row a^T v + c.
struct AffineRow
{
    std::vector<Term> terms;
    double constant = 0.0;
};

// coef * v^3 over v >= 0.
struct Cube
{
    int v;
    double coef;
};

// coef * b * log2(1 + gain * p / b), closed by 0 at b = 0.
struct PerspectiveLog
{
    int b, p;
    double gain;
    double coef;
};

// coef * sum_r (row_r)^2.
struct SquaredNorm
{
    std::vector<AffineRow> rows;
    double coef;
};

// coef * sqrt(sum_r (row_r)^2).
struct Norm
{
    std::vector<AffineRow> rows;
    double coef;
};

// coef * v^{1/degree} over v > 0, degree >= 1.
struct Root
{
    int v;
    double degree;
    double coef;
};

using Atom = std::variant<Cube, PerspectiveLog, SquaredNorm, Norm, Root>;

enum class Curvature
{
    affine,
    convex,
    concave,
    unknown
};

inline const char *to_string(Curvature c)
{
    switch (c)
    {
    case Curvature::affine: return "affine";
    case Curvature::convex: return "convex";
    case Curvature::concave: return "concave";
    case Curvature::unknown: return "unknown";
    }
    return "?";
}

// Local value, gradient and Hessian of an atom over its own variable list.
struct LocalEval
{
    std::vector<int> vars;
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

namespace detail {

inline void collect_rows(const std::vector<AffineRow> &rows, std::vector<int> &vars)
{
    for (const auto &r : rows)
        for (const auto &t : r.terms) vars.push_back(t.var);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
}

inline int local_index(const std::vector<int> &vars, int v)
{
    return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
}

// Row values r and Jacobian J (rows x local vars).
inline void rows_jacobian(const std::vector<AffineRow> &rows, const std::vector<int> &vars, const std::vector<double> &x,
                          Eigen::VectorXd &r, Eigen::MatrixXd &J)
{
    r.resize(static_cast<Eigen::Index>(rows.size()));
    J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(vars.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        double s = rows[i].constant;
        for (const auto &t : rows[i].terms)
        {
            s += t.coef * x[static_cast<std::size_t>(t.var)];
            J(static_cast<Eigen::Index>(i), local_index(vars, t.var)) += t.coef;
        }
        r[static_cast<Eigen::Index>(i)] = s;
    }
}

inline constexpr double norm_smoothing = 1e-24; // squared; keeps the norm differentiable at the origin

} // namespace detail

inline std::vector<int> atom_vars(const Atom &a)
{
    return std::visit(
        [](const auto &at) -> std::vector<int> {
            using A = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<A, Cube> || std::is_same_v<A, Root>) return {at.v};
            else if constexpr (std::is_same_v<A, PerspectiveLog>)
            {
                if (at.b < at.p) return {at.b, at.p};
                return {at.p, at.b};
            }
            else
            {
                std::vector<int> v;
                detail::collect_rows(at.rows, v);
                return v;
            }
        },
        a);
}

inline Curvature atom_curvature(const Atom &a)
{
    return std::visit(
        [](const auto &at) -> Curvature {
            using A = std::decay_t<decltype(at)>;
            if (at.coef == 0) return Curvature::affine;
            const bool pos = at.coef > 0;
            if constexpr (std::is_same_v<A, PerspectiveLog> || std::is_same_v<A, Root>)
                return pos ? Curvature::concave : Curvature::convex;
            else return pos ? Curvature::convex : Curvature::concave;
        },
        a);
}

// Value only; returns NaN outside the atom's domain.
inline double atom_value(const Atom &a, const std::vector<double> &x)
{
    const auto X = [&](int i) { return x[static_cast<std::size_t>(i)]; };
    return std::visit(
        [&](const auto &at) -> double {
            using A = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<A, Cube>)
            {
                const double v = X(at.v);
                return v < 0 ? std::numeric_limits<double>::quiet_NaN() : at.coef * v * v * v;
            }
            else if constexpr (std::is_same_v<A, PerspectiveLog>)
            {
                const double b = X(at.b), p = X(at.p);
                if (b < 0) return std::numeric_limits<double>::quiet_NaN();
                if (b == 0) return p >= 0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
                const double z = at.gain * p / b;
                if (z <= -1) return std::numeric_limits<double>::quiet_NaN();
                return at.coef * b * std::log1p(z) / std::numbers::ln2;
            }
            else if constexpr (std::is_same_v<A, Root>)
            {
                const double v = X(at.v);
                return v < 0 ? std::numeric_limits<double>::quiet_NaN() : at.coef * std::pow(v, 1.0 / at.degree);
            }
            else
            {
                double s = 0.0;
                for (const auto &r : at.rows)
                {
                    double e = r.constant;
                    for (const auto &t : r.terms) e += t.coef * X(t.var);
                    s += e * e;
                }
                if constexpr (std::is_same_v<A, SquaredNorm>) return at.coef * s;
                else return at.coef * std::sqrt(s + detail::norm_smoothing);
            }
        },
        a);
}

inline LocalEval atom_eval(const Atom &a, const std::vector<double> &x)
{
    LocalEval le;
    le.vars = atom_vars(a);
    const auto n = static_cast<Eigen::Index>(le.vars.size());
    le.grad = Eigen::VectorXd::Zero(n);
    le.hess = Eigen::MatrixXd::Zero(n, n);
    le.value = atom_value(a, x);
    const auto X = [&](int i) { return x[static_cast<std::size_t>(i)]; };
    std::visit(
        [&](const auto &at) {
            using A = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<A, Cube>)
            {
                const double v = X(at.v);
                le.grad[0] = 3.0 * at.coef * v * v;
                le.hess(0, 0) = 6.0 * at.coef * v;
            }
            else if constexpr (std::is_same_v<A, Root>)
            {
                const double v = X(at.v), e = 1.0 / at.degree;
                le.grad[0] = at.coef * e * std::pow(v, e - 1.0);
                le.hess(0, 0) = at.coef * e * (e - 1.0) * std::pow(v, e - 2.0);
            }
            else if constexpr (std::is_same_v<A, PerspectiveLog>)
            {
                const double b = X(at.b), p = X(at.p), g = at.gain, L = std::numbers::ln2;
                const int ib = detail::local_index(le.vars, at.b), ip = detail::local_index(le.vars, at.p);
                if (b <= 0)
                {
                    // closure at b = 0: slope g/ln2 along p, no curvature
                    le.grad[ip] = at.coef * g / L;
                    return;
                }
                const double z = g * p / b, q = 1.0 + z;
                le.grad[ip] = at.coef * g / (L * q);
                le.grad[ib] = at.coef * (std::log1p(z) - z / q) / L;
                const double c = at.coef / (L * b * q * q);
                le.hess(ip, ip) = -c * g * g;
                le.hess(ip, ib) = le.hess(ib, ip) = c * g * z;
                le.hess(ib, ib) = -c * z * z;
            }
            else
            {
                Eigen::VectorXd r;
                Eigen::MatrixXd J;
                detail::rows_jacobian(at.rows, le.vars, x, r, J);
                if constexpr (std::is_same_v<A, SquaredNorm>)
                {
                    le.grad = 2.0 * at.coef * J.transpose() * r;
                    le.hess = 2.0 * at.coef * J.transpose() * J;
                }
                else
                {
                    const double nr = std::sqrt(r.squaredNorm() + detail::norm_smoothing);
                    const Eigen::VectorXd Jr = J.transpose() * r;
                    le.grad = at.coef * Jr / nr;
                    le.hess = at.coef * (J.transpose() * J / nr - Jr * Jr.transpose() / (nr * nr * nr));
                }
            }
        },
        a);
    return le;
}

// Affine part plus atoms.
struct Expr
{
    std::vector<Term> linear;
    double constant = 0.0;
    std::vector<Atom> atoms;

    Expr &add(int v, double coef)
    {
        if (coef != 0.0) linear.push_back({v, coef});
        return *this;
    }
    Expr &add(double c)
    {
        constant += c;
        return *this;
    }
    Expr &add(Atom a)
    {
        atoms.push_back(std::move(a));
        return *this;
    }

    std::vector<int> vars() const
    {
        std::vector<int> v;
        for (const auto &t : linear) v.push_back(t.var);
        for (const auto &a : atoms)
        {
            const auto av = atom_vars(a);
            v.insert(v.end(), av.begin(), av.end());
        }
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }

    Curvature curvature() const
    {
        bool convex = true, concave = true;
        for (const auto &a : atoms)
        {
            const auto c = atom_curvature(a);
            if (c == Curvature::concave || c == Curvature::unknown) convex = false;
            if (c == Curvature::convex || c == Curvature::unknown) concave = false;
        }
        if (convex && concave) return Curvature::affine;
        if (convex) return Curvature::convex;
        if (concave) return Curvature::concave;
        return Curvature::unknown;
    }

    double value(const std::vector<double> &x) const
    {
        double s = constant;
        for (const auto &t : linear) s += t.coef * x[static_cast<std::size_t>(t.var)];
        for (const auto &a : atoms) s += atom_value(a, x);
        return s;
    }

    // Sum of absolute term values; the natural scale of the expression at x.
    double magnitude(const std::vector<double> &x) const
    {
        double s = std::abs(constant);
        for (const auto &t : linear) s += std::abs(t.coef * x[static_cast<std::size_t>(t.var)]);
        for (const auto &a : atoms) s += std::abs(atom_value(a, x));
        return s;
    }
};

struct Variable
{
    std::string name;
    double lo = 0.0;
    double hi = inf;
    double start = 0.0;

    bool fixed() const { return lo == hi; }
};

struct Constraint
{
    std::string name;
    Expr expr; // expr <= 0
};

class CurvatureError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct Program
{
    std::vector<Variable> vars;
    Expr objective; // maximized
    std::vector<Constraint> constraints;

    int add_var(std::string name, double lo, double hi, double start)
    {
        vars.push_back({std::move(name), lo, hi, start});
        return static_cast<int>(vars.size()) - 1;
    }
    int fixed_var(std::string name, double value) { return add_var(std::move(name), value, value, value); }
    void add_le(std::string name, Expr e) { constraints.push_back({std::move(name), std::move(e)}); }

    int free_count() const
    {
        return static_cast<int>(std::count_if(vars.begin(), vars.end(), [](const Variable &v) { return !v.fixed(); }));
    }

    std::vector<double> start_point() const
    {
        std::vector<double> x(vars.size());
        for (std::size_t i = 0; i < vars.size(); ++i) x[i] = vars[i].fixed() ? vars[i].lo : vars[i].start;
        return x;
    }

    double objective_value(const std::vector<double> &x) const { return objective.value(x); }
};

// Throws CurvatureError naming the first misplaced atom or inconsistent bound.
inline void validate(const Program &prog)
{
    const int n = static_cast<int>(prog.vars.size());
    for (const auto &v : prog.vars)
        if (!(v.lo <= v.hi) || std::isnan(v.lo) || std::isnan(v.hi))
            throw CurvatureError("variable '" + v.name + "' has inconsistent bounds");

    auto check_vars = [&](const Expr &e, const std::string &where) {
        for (int v : e.vars())
            if (v < 0 || v >= n) throw CurvatureError(where + " references unknown variable " + std::to_string(v));
    };
    auto check_domains = [&](const Expr &e, const std::string &where) {
        for (const auto &a : e.atoms)
        {
            std::visit(
                [&](const auto &at) {
                    using A = std::decay_t<decltype(at)>;
                    if constexpr (std::is_same_v<A, Cube>)
                    {
                        if (prog.vars[static_cast<std::size_t>(at.v)].lo < 0)
                            throw CurvatureError(where + ": cube atom needs a nonnegative variable");
                    }
                    else if constexpr (std::is_same_v<A, Root>)
                    {
                        if (prog.vars[static_cast<std::size_t>(at.v)].lo < 0 || at.degree < 1)
                            throw CurvatureError(where + ": root atom needs a nonnegative variable and degree >= 1");
                    }
                    else if constexpr (std::is_same_v<A, PerspectiveLog>)
                    {
                        const auto &b = prog.vars[static_cast<std::size_t>(at.b)];
                        const auto &p = prog.vars[static_cast<std::size_t>(at.p)];
                        if (b.lo < 0 || p.lo < 0 || at.gain < 0)
                            throw CurvatureError(where + ": perspective atom needs nonnegative b, p and gain");
                        if (b.fixed() && b.lo == 0 && !p.fixed())
                            throw CurvatureError(where + ": perspective atom with b fixed at 0 needs p fixed");
                    }
                },
                a);
        }
    };

    check_vars(prog.objective, "objective");
    check_domains(prog.objective, "objective");
    const auto oc = prog.objective.curvature();
    if (oc != Curvature::concave && oc != Curvature::affine)
        throw CurvatureError(std::string("objective must be concave for maximization, found ") + to_string(oc));
    for (const auto &c : prog.constraints)
    {
        check_vars(c.expr, "constraint '" + c.name + "'");
        check_domains(c.expr, "constraint '" + c.name + "'");
        const auto cc = c.expr.curvature();
        if (cc != Curvature::convex && cc != Curvature::affine)
            throw CurvatureError("constraint '" + c.name + "' must be convex <= 0, found " + to_string(cc));
    }
}

struct Residual
{
    std::string name;
    double value; // signed; positive means violated
    double scale; // magnitude of the expression's terms at the point
};

struct FeasibilityReport
{
    std::vector<Residual> residuals;  // every constraint and finite bound, in program order
    std::vector<Residual> violations; // residuals above tol * max(1, scale)

    bool feasible() const { return violations.empty(); }
    double max_relative() const
    {
        double m = 0.0;
        for (const auto &r : residuals) m = std::max(m, r.value / std::max(r.scale, 1e-300));
        return m;
    }
};

// Absolute-or-relative check: a residual counts as violated when it exceeds tol * max(1, scale)
// with scale the summed magnitude of the expression's terms, or the bound itself.
inline FeasibilityReport check_feasibility(const Program &prog, const std::vector<double> &x, double tol,
                                           double unit = 1.0)
{
    FeasibilityReport rep;
    auto push = [&](std::string name, double value, double scale) {
        Residual r{std::move(name), value, scale};
        if (!(value <= tol * std::max(unit, scale))) rep.violations.push_back(r);
        rep.residuals.push_back(std::move(r));
    };
    for (std::size_t i = 0; i < prog.vars.size(); ++i)
    {
        const auto &v = prog.vars[i];
        if (std::isfinite(v.lo)) push("lower bound " + v.name, v.lo - x[i], std::max(std::abs(v.lo), std::abs(x[i])));
        if (std::isfinite(v.hi) && !v.fixed())
            push("upper bound " + v.name, x[i] - v.hi, std::max(std::abs(v.hi), std::abs(x[i])));
    }
    for (const auto &c : prog.constraints) push(c.name, c.expr.value(x), c.expr.magnitude(x));
    return rep;
}

namespace detail {

inline std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string rows_str(const std::vector<AffineRow> &rows)
{
    std::string s = "[";
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        if (i) s += "; ";
        for (const auto &t : rows[i].terms) s += num(t.coef) + "*x" + std::to_string(t.var) + " ";
        s += "+ " + num(rows[i].constant);
    }
    return s + "]";
}

inline std::string expr_str(const Expr &e)
{
    std::string s = num(e.constant);
    for (const auto &t : e.linear) s += " + " + num(t.coef) + "*x" + std::to_string(t.var);
    for (const auto &a : e.atoms)
    {
        s += " + ";
        s += std::visit(
            [](const auto &at) -> std::string {
                using A = std::decay_t<decltype(at)>;
                if constexpr (std::is_same_v<A, Cube>) return num(at.coef) + "*cube(x" + std::to_string(at.v) + ")";
                else if constexpr (std::is_same_v<A, Root>)
                    return num(at.coef) + "*root(x" + std::to_string(at.v) + ", " + num(at.degree) + ")";
                else if constexpr (std::is_same_v<A, PerspectiveLog>)
                    return num(at.coef) + "*perspective_log2(b=x" + std::to_string(at.b) + ", p=x" +
                           std::to_string(at.p) + ", gain=" + num(at.gain) + ")";
                else if constexpr (std::is_same_v<A, SquaredNorm>) return num(at.coef) + "*sqnorm" + rows_str(at.rows);
                else return num(at.coef) + "*norm" + rows_str(at.rows);
            },
            a);
    }
    return s;
}

} // namespace detail

// Stable text form: variables by index, then objective, then constraints in insertion order.
inline std::string dump(const Program &prog)
{
    std::ostringstream os;
    os << "variables " << prog.vars.size() << "\n";
    for (std::size_t i = 0; i < prog.vars.size(); ++i)
    {
        const auto &v = prog.vars[i];
        os << "  x" << i << " " << v.name << " in [" << detail::num(v.lo) << ", " << detail::num(v.hi) << "]"
           << (v.fixed() ? " fixed" : "") << "\n";
    }
    os << "maximize " << detail::expr_str(prog.objective) << "\n";
    os << "constraints " << prog.constraints.size() << "\n";
    for (const auto &c : prog.constraints) os << "  " << c.name << ": " << detail::expr_str(c.expr) << " <= 0\n";
    return os.str();
}

} // namespace uavris::cvx
