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

#include "channel.hpp"
#include "scenario.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uavris {

// Per-UE, per-slot transmission and compression decisions, stored K x T.
struct ResourceSchedule
{
    Eigen::MatrixXd f; // CPU frequency, configured cycle unit
    Eigen::MatrixXd P; // upload power, W
    Eigen::MatrixXd p; // b * P, W
    Eigen::MatrixXd a; // WPT time fraction
    Eigen::MatrixXd b; // upload time fraction

    static ResourceSchedule zeros(int K, int T)
    {
        const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(K, T);
        return {z, z, z, z, z};
    }
    int K() const { return static_cast<int>(a.rows()); }
    int T() const { return static_cast<int>(a.cols()); }
};

// ---- compression model ------------------------------------------------

// e^{eps/kappa} - e^{eps}; vanishes at kappa = 1.
inline double compression_denominator(double kappa, double epsilon)
{
    if (!(kappa > 0 && kappa < 1))
        throw std::domain_error("compression ratio must lie in (0,1); the bit model is singular at kappa=1");
    return std::exp(epsilon / kappa) - std::exp(epsilon);
}

inline double compression_energy(double f, const Scenario &sc)
{
    return sc.gamma * sc.delta_t * sc.gamma_c * f * f * f;
}

inline double lossless_compressed_bits(double f, double kappa, const Scenario &sc)
{
    return sc.gamma * sc.delta_t * sc.cycle_unit_scale * f / compression_denominator(kappa, sc.epsilon);
}

inline double lossy_effective_bits(double f_bar, double kappa_bar, const Scenario &sc)
{
    return std::sqrt(kappa_bar) * lossless_compressed_bits(f_bar, kappa_bar, sc);
}

inline double info_loss(double kappa_bar)
{
    if (!(kappa_bar >= 0 && kappa_bar <= 1)) throw std::domain_error("kappa_bar must lie in [0,1]");
    return 1.0 - std::sqrt(kappa_bar);
}

// Raw data represented by the uploaded bits: uncompressed part plus what compression saved.
inline double raw_uploaded_bits(double R, double S, double kappa) { return R + (1.0 - kappa) * S; }

// ---- uplink rate ------------------------------------------------------

// B * delta * b * log2(1 + gain * P / sigma^2).
inline double rate_bits(const Scenario &sc, double gain, double b, double P)
{
    if (b <= 0 || P <= 0 || gain <= 0) return 0.0;
    return sc.B * sc.delta_t * b * std::log1p(gain * P / sc.sigma2_B) / std::numbers::ln2;
}

// Perspective form in (b, p = b*P), closed by 0 at b = 0.
inline double rate_bits_perspective(const Scenario &sc, double gain, double b, double p)
{
    if (b <= 0 || p <= 0 || gain <= 0) return 0.0;
    return sc.B * sc.delta_t * b * std::log1p(gain * p / (b * sc.sigma2_B)) / std::numbers::ln2;
}

inline double effective_gain(const ChannelState &ch, const CVec &v, const Eigen::VectorXd &theta, int k, int t)
{
    return std::norm(ch.effective(k, t, theta).dot(v));
}

inline double harvested_energy(const Scenario &sc, const ChannelState &ch, const CVec &w, const Eigen::VectorXd &theta,
                               int k, int t, double a_kt)
{
    if (a_kt <= 0) return 0.0;
    return sc.eta_0 * sc.delta_t * effective_gain(ch, w, theta, k, t) * a_kt;
}

inline double uplink_bits(const Scenario &sc, const ChannelState &ch, const CVec &u, const Eigen::VectorXd &theta_bar,
                          int k, int t, double b_kt, double P_kt)
{
    if (b_kt <= 0 || P_kt <= 0) return 0.0;
    return rate_bits(sc, effective_gain(ch, u, theta_bar, k, t), b_kt, P_kt);
}

inline double uplink_bits_perspective(const Scenario &sc, const ChannelState &ch, const CVec &u,
                                      const Eigen::VectorXd &theta_bar, int k, int t, double b_kt, double p_kt)
{
    if (b_kt <= 0 || p_kt <= 0) return 0.0;
    return rate_bits_perspective(sc, effective_gain(ch, u, theta_bar, k, t), b_kt, p_kt);
}

// ---- aligned (distance-separable) form -------------------------------

// Coefficients splitting the composite link into a direct term and a reflected term
// whose magnitude scales as h0 / (d_R2U^{alpha_RU/2} d_B2R^{alpha_BR/2}).
struct LinkCoefficients
{
    cd A{}, B{}, C{}; // upload: direct, cross, reflected
    cd D{}, F{}, G{}; // WPT: direct, cross, reflected
};

namespace detail {

// b_k^H diag(e^{j theta}) conj(b0) a0^H v
inline cd reflected_coefficient(const ChannelState &ch, int k, int t, const CVec &v, const Eigen::VectorXd &theta)
{
    const CVec &bk = ch.b_k[ch.kt(k, t)];
    const CVec &b0 = ch.b0[t];
    cd s = 0;
    for (int n = 0; n < ch.N; ++n) s += std::conj(bk[n]) * std::polar(1.0, theta[n]) * std::conj(b0[n]);
    return s * ch.a0[t].dot(v);
}

} // namespace detail

inline LinkCoefficients link_coefficients(const ChannelState &ch, int k, int t, const CVec &w, const CVec &u,
                                          const Eigen::VectorXd &theta, const Eigen::VectorXd &theta_bar)
{
    LinkCoefficients c;
    c.A = ch.h[k].dot(u);
    c.C = detail::reflected_coefficient(ch, k, t, u, theta_bar);
    c.B = c.A * std::conj(c.C);
    c.D = ch.h[k].dot(w);
    c.G = detail::reflected_coefficient(ch, k, t, w, theta);
    c.F = c.D * std::conj(c.G);
    return c;
}

// |direct|^2 + 2|cross| h0 / sqrt(xy) + |reflected|^2 h0^2 / (xy), with x, y the slack pathloss powers.
inline double aligned_gain(double direct_sq, double cross, double reflected_sq, double h0, double x, double y)
{
    const double s = 1.0 / std::sqrt(x * y);
    return direct_sq + 2.0 * cross * h0 * s + reflected_sq * h0 * h0 * s * s;
}

inline double aligned_rate_slack(const Scenario &sc, const LinkCoefficients &c, double x, double y, double b_kt,
                                 double P_kt)
{
    return rate_bits(sc, aligned_gain(std::norm(c.A), std::abs(c.B), std::norm(c.C), sc.h0, x, y), b_kt, P_kt);
}

inline double aligned_energy_slack(const Scenario &sc, const LinkCoefficients &c, double x, double y, double a_kt)
{
    if (a_kt <= 0) return 0.0;
    return sc.eta_0 * sc.delta_t * aligned_gain(std::norm(c.D), std::abs(c.F), std::norm(c.G), sc.h0, x, y) * a_kt;
}

inline double aligned_rate(const Scenario &sc, const LinkCoefficients &c, double d_R2U, double d_B2R, double b_kt,
                           double P_kt)
{
    return aligned_rate_slack(sc, c, std::pow(d_R2U, sc.alpha_RU), std::pow(d_B2R, sc.alpha_BR), b_kt, P_kt);
}

inline double aligned_energy(const Scenario &sc, const LinkCoefficients &c, double d_R2U, double d_B2R, double a_kt)
{
    return aligned_energy_slack(sc, c, std::pow(d_R2U, sc.alpha_RU), std::pow(d_B2R, sc.alpha_BR), a_kt);
}

} // namespace uavris
