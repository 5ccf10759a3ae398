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

// Energy efficiency of direct uploading versus compression, and the powers where they cross.
// For compression, P is the computing power gamma_c f^3.

#pragma once

#include "csv.hpp"
#include "scenario.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace uavris {

class BracketError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require_positive_power(double P)
{
    if (!(P > 0)) throw std::domain_error("power must be positive");
}

} // namespace detail

// Bits uploaded per joule of transmit energy. Real may be a wider floating type.
template <class Real>
Real eta_upload_as(const Real &P, double gain, double b, const Scenario &sc)
{
    if (!(P > 0)) throw std::domain_error("power must be positive");
    const Real snr = Real(gain / sc.sigma2_B) * P;
    Real bits;
    if constexpr (std::is_floating_point_v<Real>) bits = std::log1p(snr);
    else bits = log(Real(1) + snr);
    return Real(sc.B * sc.delta_t * b) * bits / (Real(std::numbers::ln2) * P);
}

inline double eta_upload(double P, double gain, double b, const Scenario &sc) { return eta_upload_as(P, gain, b, sc); }

// Raw bits removed by lossless compression per joule of computing energy.
inline double eta_lossless(double P, double kappa, const Scenario &sc)
{
    detail::require_positive_power(P);
    if (!(kappa > 0) || kappa > 1) throw std::domain_error("compression ratio must lie in (0, 1]");
    if (kappa == 1.0) return 0.0;
    return (1.0 - kappa) /
           (std::cbrt(sc.gamma_c) * (std::exp(sc.epsilon / kappa) - std::exp(sc.epsilon)) * std::pow(P, 2.0 / 3.0));
}

// Lossy counterpart: the lossless efficiency at kappa_bar scaled by sqrt(kappa_bar).
inline double eta_lossy(double P, double kappa_bar, const Scenario &sc)
{
    return std::sqrt(kappa_bar) * eta_lossless(P, kappa_bar, sc);
}

inline double eta_upload_derivative(double P, double gain, double b, const Scenario &sc)
{
    detail::require_positive_power(P);
    const double s = gain / sc.sigma2_B;
    const double k = sc.B * sc.delta_t * b / std::numbers::ln2;
    return k * (s / ((1.0 + s * P) * P) - std::log1p(s * P) / (P * P));
}

// Both compression efficiencies are c P^(-2/3), so the derivative is -2/3 of the value over P.
inline double eta_lossless_derivative(double P, double kappa, const Scenario &sc)
{
    return -2.0 / 3.0 * eta_lossless(P, kappa, sc) / P;
}

inline double eta_lossy_derivative(double P, double kappa_bar, const Scenario &sc)
{
    return -2.0 / 3.0 * eta_lossy(P, kappa_bar, sc) / P;
}

struct Crossover
{
    double power = 0.0;
    double residual = 0.0; // |a - b| / max(|a|, |b|) at the root
    int iterations = 0;
};

// Bisection in log power for a sign change of a - b, to relative width tol.
inline Crossover crossover_power(const std::function<double(double)> &eta_a, const std::function<double(double)> &eta_b,
                                 double lo = 1e-6, double hi = 1e3, double tol = 1e-13)
{
    if (!(lo > 0) || !(hi > lo)) throw BracketError("bracket must satisfy 0 < lo < hi");
    auto diff = [&](double P) { return eta_a(P) - eta_b(P); };
    const double f_lo = diff(lo), f_hi = diff(hi);
    if (f_lo == 0.0) return {lo, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0};
    if ((f_lo > 0) == (f_hi > 0)) throw BracketError("no sign change of the efficiency difference in the bracket");
    Crossover c;
    while (hi / lo - 1.0 > tol && c.iterations < 200)
    {
        const double mid = std::sqrt(lo * hi);
        const double f = diff(mid);
        if (f == 0.0)
        {
            lo = hi = mid;
            break;
        }
        ((f > 0) == (f_lo > 0) ? lo : hi) = mid;
        ++c.iterations;
    }
    c.power = std::sqrt(lo * hi);
    const double a = eta_a(c.power), b = eta_b(c.power);
    c.residual = std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    return c;
}

inline std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    return g;
}

// Sign changes of a - b over a grid.
inline int sign_changes(const std::function<double(double)> &eta_a, const std::function<double(double)> &eta_b,
                        const std::vector<double> &grid)
{
    int n = 0, prev = 0;
    for (double P : grid)
    {
        const double d = eta_a(P) - eta_b(P);
        const int s = (d > 0) - (d < 0);
        if (s != 0 && prev != 0 && s != prev) ++n;
        if (s != 0) prev = s;
    }
    return n;
}

// Direct-upload link used for the efficiency comparison.
struct EfficiencySetup
{
    double gain = db_to_linear(-130.0); // composite channel power gain
    double b = 0.2;                     // upload share of the slot
    double lo = 1e-6, hi = 1e3;         // power bracket, W
    int points = 1000;                  // curve resolution
};

struct EfficiencyReport
{
    Crossover lossless, lossy;
    int lossless_sign_changes = 0, lossy_sign_changes = 0;
    CsvTable curves{{"P", "eta_U", "eta_C_lossless", "eta_C_lossy"}};
};

// Curves and crossovers for UE k's compression ratios.
inline EfficiencyReport efficiency_analysis(const Scenario &sc, const EfficiencySetup &e, int k = 0)
{
    const double kappa = sc.kappa.at(static_cast<std::size_t>(k)), kappa_bar = sc.kappa_bar.at(static_cast<std::size_t>(k));
    const auto up = [&](double P) { return eta_upload(P, e.gain, e.b, sc); };
    const auto cl = [&](double P) { return eta_lossless(P, kappa, sc); };
    const auto cy = [&](double P) { return eta_lossy(P, kappa_bar, sc); };
    EfficiencyReport r;
    r.lossless = crossover_power(up, cl, e.lo, e.hi);
    r.lossy = crossover_power(up, cy, e.lo, e.hi);
    const auto grid = log_grid(e.lo, e.hi, e.points);
    r.lossless_sign_changes = sign_changes(up, cl, grid);
    r.lossy_sign_changes = sign_changes(up, cy, grid);
    for (double P : grid) r.curves.add_row({P, up(P), cl(P), cy(P)});
    return r;
}

} // namespace uavris
