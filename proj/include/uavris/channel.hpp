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

#include "csv.hpp"
#include "scenario.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace uavris {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

class GeometryError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double min_link_distance = 0.5; // m

// UAV waypoints, one per slot, all at the scenario altitude.
struct Trajectory
{
    std::vector<Vec3> q;

    int slots() const { return static_cast<int>(q.size()); }
    double max_step() const
    {
        double m = 0.0;
        for (std::size_t t = 1; t < q.size(); ++t) m = std::max(m, (q[t] - q[t - 1]).norm());
        return m;
    }
};

struct LinkDistances
{
    double d_B2U = 0; // BS to UE
    double d_R2U = 0; // RIS to UE
    double d_B2R = 0; // BS to RIS
};

struct AngleSines
{
    double sin_phi_k = 0;    // BS departure towards UE k
    double sin_varphi_k = 0; // RIS departure towards UE k
    double sin_phi0 = 0;     // BS departure towards RIS
    double sin_varphi0 = 0;  // RIS arrival from BS
};

namespace detail {

inline double checked_distance(const Vec3 &a, const Vec3 &b, const char *what)
{
    const double d = (a - b).norm();
    if (!(d >= min_link_distance))
        throw GeometryError(std::string("degenerate geometry: ") + what + " distance " + std::to_string(d) +
                            " m below the 0.5 m guard");
    return d;
}

// sqrt(d^2 - h^2)/d with the radicand clamped at zero.
inline double horizontal_sine(double d, double h)
{
    double r = d * d - h * h;
    if (r < 0)
    {
        if (r < -1e-12 * d * d) throw GeometryError("height exceeds link distance");
        r = 0;
    }
    return std::sqrt(r) / d;
}

} // namespace detail

inline LinkDistances distances(const Vec3 &q_uav, const Scenario &sc, int k)
{
    const auto &qk = sc.q.at(static_cast<std::size_t>(k));
    return {detail::checked_distance(qk, sc.q0, "BS-UE"), detail::checked_distance(q_uav, qk, "RIS-UE"),
            detail::checked_distance(q_uav, sc.q0, "BS-RIS")};
}

inline AngleSines angle_sines(const Vec3 &q_uav, const Scenario &sc, int k)
{
    const auto d = distances(q_uav, sc, k);
    const auto &qk = sc.q.at(static_cast<std::size_t>(k));
    const double lift_uav = q_uav.z() - sc.z_B();
    AngleSines s;
    s.sin_phi_k = std::clamp((qk.x() - sc.q0.x()) / d.d_B2U, -1.0, 1.0);
    s.sin_varphi_k = detail::horizontal_sine(d.d_R2U, q_uav.z() - qk.z());
    s.sin_phi0 = std::clamp(lift_uav / d.d_B2R, -1.0, 1.0);
    s.sin_varphi0 = detail::horizontal_sine(d.d_B2R, lift_uav);
    return s;
}

// Half-wavelength ULA response, entry l = exp(-j*pi*l*s).
inline CVec steering(double sin_angle, int L)
{
    CVec v(L);
    for (int l = 0; l < L; ++l) v[l] = std::polar(1.0, -std::numbers::pi * l * sin_angle);
    return v;
}

inline double pathloss_amplitude(double h0, double d, double alpha) { return std::sqrt(h0 / std::pow(d, alpha)); }

// Channel triplets for every UE and slot along a trajectory.
struct ChannelState
{
    int M = 0, N = 0, K = 0, T = 0;

    // per UE
    std::vector<CVec> h;
    std::vector<double> d_B2U, sin_phi;

    // per slot
    std::vector<CMat> G_UR;
    std::vector<CVec> a0, b0; // BS and RIS steering towards each other
    std::vector<double> d_B2R, sin_phi0, sin_varphi0, G0;

    // per (k, t), index k*T + t
    std::vector<CVec> g, b_k;
    std::vector<double> d_R2U, sin_varphi, g_amp;

    std::size_t kt(int k, int t) const { return static_cast<std::size_t>(k) * T + t; }
    const CVec &g_of(int k, int t) const { return g[kt(k, t)]; }

    // (h^H + g^H diag(e^{j theta}) G^H)^H as a column vector.
    CVec effective(int k, int t, const Eigen::VectorXd &theta) const
    {
        const CVec &gk = g[kt(k, t)];
        CVec mix(N);
        for (int n = 0; n < N; ++n) mix[n] = std::polar(1.0, -theta[n]) * gk[n];
        return h[k] + G_UR[t] * mix;
    }
};

// Fills one slot's UAV-dependent entries.
inline void assemble_slot(const Scenario &sc, const Vec3 &q_uav, int t, ChannelState &ch)
{
    LinkDistances d0{};
    AngleSines s0{};
    for (int k = 0; k < sc.K; ++k)
    {
        const auto d = distances(q_uav, sc, k);
        const auto s = angle_sines(q_uav, sc, k);
        const auto i = ch.kt(k, t);
        ch.d_R2U[i] = d.d_R2U;
        ch.sin_varphi[i] = s.sin_varphi_k;
        ch.g_amp[i] = pathloss_amplitude(sc.h0, d.d_R2U, sc.alpha_RU);
        ch.b_k[i] = steering(s.sin_varphi_k, sc.N);
        ch.g[i] = ch.g_amp[i] * ch.b_k[i];
        d0 = d;
        s0 = s;
    }
    ch.d_B2R[t] = d0.d_B2R;
    ch.sin_phi0[t] = s0.sin_phi0;
    ch.sin_varphi0[t] = s0.sin_varphi0;
    ch.G0[t] = pathloss_amplitude(sc.h0, d0.d_B2R, sc.alpha_BR);
    ch.a0[t] = steering(s0.sin_phi0, sc.M);
    ch.b0[t] = steering(s0.sin_varphi0, sc.N);
    ch.G_UR[t] = ch.G0[t] * ch.a0[t] * ch.b0[t].transpose();
}

inline ChannelState assemble_channels(const Scenario &sc, const Trajectory &Q)
{
    if (Q.slots() != sc.T) throw std::invalid_argument("trajectory has " + std::to_string(Q.slots()) + " waypoints, T=" + std::to_string(sc.T));
    ChannelState ch;
    ch.M = sc.M;
    ch.N = sc.N;
    ch.K = sc.K;
    ch.T = sc.T;
    const auto K = static_cast<std::size_t>(sc.K), T = static_cast<std::size_t>(sc.T);
    ch.h.resize(K);
    ch.d_B2U.resize(K);
    ch.sin_phi.resize(K);
    for (int k = 0; k < sc.K; ++k)
    {
        const auto &qk = sc.q[static_cast<std::size_t>(k)];
        const double d = detail::checked_distance(qk, sc.q0, "BS-UE");
        ch.d_B2U[k] = d;
        ch.sin_phi[k] = std::clamp((qk.x() - sc.q0.x()) / d, -1.0, 1.0);
        ch.h[k] = pathloss_amplitude(sc.h0, d, sc.alpha_BU) * steering(ch.sin_phi[k], sc.M);
    }
    ch.G_UR.resize(T);
    ch.a0.resize(T);
    ch.b0.resize(T);
    ch.d_B2R.resize(T);
    ch.sin_phi0.resize(T);
    ch.sin_varphi0.resize(T);
    ch.G0.resize(T);
    ch.g.resize(K * T);
    ch.b_k.resize(K * T);
    ch.d_R2U.resize(K * T);
    ch.sin_varphi.resize(K * T);
    ch.g_amp.resize(K * T);
    for (int t = 0; t < sc.T; ++t) assemble_slot(sc, Q.q[static_cast<std::size_t>(t)], t, ch);
    return ch;
}

inline CsvTable geometry_table(const ChannelState &ch)
{
    CsvTable tab({"t", "k", "d_B2U", "d_R2U", "d_B2R", "sin_phi_k", "sin_varphi_k", "sin_phi0", "sin_varphi0"});
    for (int t = 0; t < ch.T; ++t)
        for (int k = 0; k < ch.K; ++k)
        {
            const auto i = ch.kt(k, t);
            tab.add_row({static_cast<long long>(t + 1), static_cast<long long>(k + 1), ch.d_B2U[k], ch.d_R2U[i],
                         ch.d_B2R[t], ch.sin_phi[k], ch.sin_varphi[i], ch.sin_phi0[t], ch.sin_varphi0[t]});
        }
    return tab;
}

} // namespace uavris
