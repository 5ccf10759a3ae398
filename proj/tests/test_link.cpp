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

#include <uavris/beamforming.hpp>
#include <uavris/link.hpp>

#include <random>

using namespace uavris;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ChannelState hover_channels(const Scenario &sc, double x, double y)
{
    return assemble_channels(sc, Trajectory{std::vector<Vec3>(static_cast<std::size_t>(sc.T), sc.at_altitude(x, y))});
}

CVec random_unit(std::mt19937_64 &rng, int M)
{
    std::normal_distribution<double> nd;
    CVec v(M);
    for (int m = 0; m < M; ++m) v[m] = cd(nd(rng), nd(rng));
    return v / v.norm();
}

Eigen::VectorXd random_phases(std::mt19937_64 &rng, int N)
{
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    Eigen::VectorXd th(N);
    for (int n = 0; n < N; ++n) th[n] = u(rng);
    return th;
}

} // namespace

TEST_CASE("Harvested energy")
{
    Scenario sc;
    sc.T = 2;
    auto ch = hover_channels(sc, 0, 5);
    for (auto &g : ch.g) g.setZero();
    ch.h[0] *= std::sqrt(1.6e-6) / ch.h[0].norm();
    const Eigen::VectorXd th = Eigen::VectorXd::Zero(sc.N);
    const CVec w = std::sqrt(sc.P_T) * ch.h[0] / ch.h[0].norm();
    CHECK(harvested_energy(sc, ch, w, th, 0, 0, 0.0) == 0.0);
    // 0.8 * 0.04 * 3.16227766 * 1.6e-6
    CHECK_THAT(harvested_energy(sc, ch, w, th, 0, 0, 1.0), WithinRel(1.6192e-7, 1e-4));
    CHECK_THAT(harvested_energy(sc, ch, w, th, 0, 0, 1.0), WithinRel(1.61908616e-7, 1e-8));
    CHECK_THAT(harvested_energy(sc, ch, w, th, 0, 0, 0.6), WithinRel(2 * harvested_energy(sc, ch, w, th, 0, 0, 0.3), 1e-14));
}

TEST_CASE("Uplink bits")
{
    Scenario sc;
    CHECK(rate_bits(sc, 1e-7, 0.5, 0.0) == 0.0);
    CHECK(rate_bits(sc, 1e-7, 0.0, 0.1) == 0.0);
    // 4e7 * 0.04 * 0.5 * log2(11)
    CHECK_THAT(rate_bits(sc, 1e-7, 0.5, 0.1), WithinRel(2.76754529e6, 1e-8));

    CHECK(rate_bits_perspective(sc, 1e-7, 0.0, 0.0) == 0.0);
    CHECK_THAT(rate_bits_perspective(sc, 1e-7, 0.5, 0.05), WithinRel(rate_bits(sc, 1e-7, 0.5, 0.1), 1e-14));
    CHECK_THAT(rate_bits_perspective(sc, 1e-7, 0.6, 0.08), WithinRel(2 * rate_bits_perspective(sc, 1e-7, 0.3, 0.04), 1e-14));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 200; ++i)
    {
        const double b = u(rng) + 1e-3, p = u(rng), g = 1e-8 * u(rng);
        CHECK_THAT(rate_bits_perspective(sc, g, b, p), WithinRel(rate_bits(sc, g, b, p / b), 1e-12));
        CHECK(rate_bits(sc, g, b, p * 1.1) >= rate_bits(sc, g, b, p));
        CHECK(rate_bits(sc, g * 1.1, b, p) >= rate_bits(sc, g, b, p));
    }
}

TEST_CASE("Uplink bits through the channel match the scalar form")
{
    Scenario sc;
    sc.T = 3;
    const auto ch = hover_channels(sc, 3, 4);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i)
    {
        const CVec u = random_unit(rng, sc.M);
        const auto th = random_phases(rng, sc.N);
        const int k = i % sc.K;
        const double gain = std::norm(ch.effective(k, 1, th).dot(u));
        CHECK_THAT(uplink_bits(sc, ch, u, th, k, 1, 0.3, 0.01), WithinRel(rate_bits(sc, gain, 0.3, 0.01), 1e-14));
        CHECK_THAT(uplink_bits_perspective(sc, ch, u, th, k, 1, 0.3, 0.003),
                   WithinRel(uplink_bits(sc, ch, u, th, k, 1, 0.3, 0.01), 1e-12));
    }
}

TEST_CASE("Compression model")
{
    Scenario sc;
    CHECK(compression_energy(0.0, sc) == 0.0);
    CHECK_THAT(compression_energy(100.0, sc), WithinRel(3.2e-3, 1e-12));
    CHECK_THAT(compression_energy(200.0, sc), WithinRel(8 * compression_energy(100.0, sc), 1e-14));

    CHECK(lossless_compressed_bits(0.0, 0.5, sc) == 0.0);
    // 3.2e6 / (e^2.76 - e^1.38)
    CHECK_THAT(lossless_compressed_bits(1e8, 0.5, sc), WithinRel(2.7062e5, 1e-4));
    CHECK_THROWS_AS(lossless_compressed_bits(1e8, 1.0, sc), std::domain_error);
    double prev = 1e300;
    for (double kappa = 0.95; kappa > 0.05; kappa -= 0.05)
    {
        const double s = lossless_compressed_bits(1e6, kappa, sc);
        CHECK(s < prev);
        prev = s;
    }

    CHECK(info_loss(1.0) == 0.0);
    CHECK_THAT(info_loss(1e-12), WithinAbs(1.0, 1e-5));
    CHECK_THROWS_AS(lossy_effective_bits(1e6, 1.0, sc), std::domain_error);
    for (double kb : {0.1, 0.5, 0.9})
        CHECK_THAT(lossy_effective_bits(1e6, kb, sc), WithinRel(std::sqrt(kb) * lossless_compressed_bits(1e6, kb, sc), 1e-14));

    CHECK(raw_uploaded_bits(1e6, 0.0, 0.5) == 1e6);
    CHECK(raw_uploaded_bits(1e6, 2e5, 1.0) == 1e6);
    CHECK_THAT(raw_uploaded_bits(1e6, 2e5, 0.5), WithinRel(1.1e6, 1e-15));
}

TEST_CASE("Cycle unit scale converts frequency to cycles")
{
    Scenario sc;
    sc.cycle_unit_scale = 1e6;
    CHECK_THAT(lossless_compressed_bits(100.0, 0.5, sc), WithinRel(2.7062e5, 1e-4));
    CHECK_THAT(compression_energy(100.0, sc), WithinRel(3.2e-3, 1e-12));
}

TEST_CASE("Link coefficients vanish with inactive beams and respect the Cauchy-Schwarz bound")
{
    Scenario sc;
    sc.T = 4;
    const auto ch = hover_channels(sc, -2, 7);
    std::mt19937_64 rng(5);
    const CVec zero = CVec::Zero(sc.M);
    const auto th = random_phases(rng, sc.N);
    const auto c0 = link_coefficients(ch, 1, 2, zero, zero, th, th);
    CHECK(c0.A == cd(0));
    CHECK(c0.B == cd(0));
    CHECK(c0.C == cd(0));
    CHECK(c0.D == cd(0));
    CHECK(c0.F == cd(0));
    CHECK(c0.G == cd(0));

    for (int i = 0; i < 1000; ++i)
    {
        const CVec u = random_unit(rng, sc.M);
        const CVec w = std::sqrt(sc.P_T) * random_unit(rng, sc.M);
        const auto c = link_coefficients(ch, i % sc.K, i % sc.T, w, u, random_phases(rng, sc.N), random_phases(rng, sc.N));
        CHECK(std::abs(c.C) <= sc.N * std::sqrt(double(sc.M)) * u.norm() * (1 + 1e-12));
        CHECK(std::abs(c.B) <= ch.h[i % sc.K].norm() * u.squaredNorm() * std::sqrt(double(sc.M * sc.N)) * sc.N *
                                   std::sqrt(double(sc.M)));
        CHECK(std::isfinite(std::abs(c.F)));
    }
}

TEST_CASE("Composite link splits into direct and scaled reflected terms")
{
    Scenario sc;
    sc.T = 2;
    const auto ch = hover_channels(sc, 4, -3);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i)
    {
        const int k = i % sc.K;
        const CVec u = random_unit(rng, sc.M);
        const auto th = random_phases(rng, sc.N);
        const auto c = link_coefficients(ch, k, 0, u, u, th, th);
        const double scale = sc.h0 / (std::pow(ch.d_R2U[ch.kt(k, 0)], sc.alpha_RU / 2) * std::pow(ch.d_B2R[0], sc.alpha_BR / 2));
        const cd composite = ch.effective(k, 0, th).dot(u);
        CHECK(std::abs(composite - (c.A + scale * c.C)) <= 1e-12 * std::abs(composite));
    }
}

TEST_CASE("Aligned forms with zero coefficients")
{
    Scenario sc;
    LinkCoefficients c;
    CHECK(aligned_rate(sc, c, 10.0, 8.0, 0.5, 0.1) == 0.0);
    CHECK(aligned_energy(sc, c, 10.0, 8.0, 0.5) == 0.0);
}
