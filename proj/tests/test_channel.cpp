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

#include <uavris/channel.hpp>

#include <Eigen/Dense>

#include <random>

using namespace uavris;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory hover(const Scenario &sc, double x, double y)
{
    return Trajectory{std::vector<Vec3>(static_cast<std::size_t>(sc.T), sc.at_altitude(x, y))};
}

} // namespace

TEST_CASE("Distances follow the node coordinates")
{
    Scenario sc;
    CHECK_THAT(distances({0, 0, 8}, sc, 2).d_B2R, WithinRel(8.0, 1e-15));
    CHECK_THAT(distances({0, 0, 8}, sc, 2).d_R2U, WithinRel(12.806248474865697, 1e-14));
    CHECK_THAT(distances({0, 0, 8}, sc, 0).d_B2U, WithinRel(std::sqrt(200.0), 1e-15));
}

TEST_CASE("Co-located nodes raise a geometry error")
{
    Scenario sc;
    sc.q[0] = Vec3(1, 1, 7.8);
    CHECK_THROWS_AS(distances({1, 1, 8}, sc, 0), GeometryError);
    sc.q[0] = sc.q0;
    CHECK_THROWS_AS(distances({5, 5, 8}, sc, 0), GeometryError);
}

TEST_CASE("Angle sines")
{
    Scenario sc;
    auto s = angle_sines({0, 0, 8}, sc, 0);
    CHECK_THAT(s.sin_phi0, WithinAbs(1.0, 1e-15));
    CHECK_THAT(s.sin_varphi0, WithinAbs(0.0, 1e-15));

    s = angle_sines({-10, 10, 8}, sc, 0);
    CHECK_THAT(s.sin_varphi_k, WithinAbs(0.0, 1e-12));

    s = angle_sines({6, 0, 8}, sc, 0);
    CHECK_THAT(s.sin_phi0, WithinAbs(0.8, 1e-15));
    CHECK_THAT(s.sin_varphi0, WithinAbs(0.6, 1e-15));
    CHECK_THAT(s.sin_phi_k, WithinAbs(-10.0 / std::sqrt(200.0), 1e-15));
}

TEST_CASE("Steering vectors")
{
    const auto broadside = steering(0.0, 4);
    for (int l = 0; l < 4; ++l) CHECK(std::abs(broadside[l] - cd(1, 0)) < 1e-15);

    const auto half = steering(0.5, 4);
    const cd expect[] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    for (int l = 0; l < 4; ++l) CHECK(std::abs(half[l] - expect[l]) < 1e-12);

    const auto endfire = steering(1.0, 2);
    CHECK(std::abs(endfire[1] - cd(-1, 0)) < 1e-12);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i)
    {
        const int L = 1 + static_cast<int>(rng() % 40);
        const auto v = steering(u(rng), L);
        CHECK_THAT(v.squaredNorm(), WithinRel(static_cast<double>(L), 1e-12));
        for (int l = 0; l < L; ++l) CHECK_THAT(std::abs(v[l]), WithinRel(1.0, 1e-13));
    }
}

TEST_CASE("Channel magnitudes follow the pathloss model")
{
    Scenario sc;
    sc.q[0] = Vec3(1, 0, 0); // d_B2U = 1
    sc.q[1] = Vec3(0, 10, 0);
    const auto ch = assemble_channels(sc, hover(sc, 0, 10 - 1e-9));
    for (int m = 0; m < sc.M; ++m) CHECK_THAT(std::abs(ch.h[0][m]), WithinRel(std::sqrt(1e-5), 1e-12));
    // UAV 8 m above UE 1: d_R2U = 8; separate check for d = 10 below
    CHECK_THAT(ch.d_R2U[ch.kt(1, 0)], WithinRel(8.0, 1e-9));

    Scenario s2;
    s2.q[2] = Vec3(6, 0, 0);
    const auto ch2 = assemble_channels(s2, hover(s2, 0, 0)); // d_R2U(UE 3) = 10
    const CVec &g = ch2.g_of(2, 0);
    for (int n = 0; n < s2.N; ++n) CHECK_THAT(std::abs(g[n]), WithinRel(3.1622776601683795e-4, 1e-12));

    for (int t = 0; t < sc.T; t += 7)
    {
        Eigen::JacobiSVD<CMat> svd(ch.G_UR[static_cast<std::size_t>(t)]);
        const auto sv = svd.singularValues();
        CHECK(sv[1] <= 1e-12 * sv[0]);
    }

    for (int k = 0; k < sc.K; ++k)
        CHECK_THAT(ch.h[k].squaredNorm(), WithinRel(sc.M * sc.h0 / std::pow(ch.d_B2U[k], sc.alpha_BU), 1e-12));
}

TEST_CASE("Channel gains decay with distance")
{
    Scenario sc;
    double prev = 1e300;
    for (double x = 10; x <= 40; x += 2)
    {
        const auto ch = assemble_channels(sc, hover(sc, x, 10));
        const double gn = ch.g_of(3, 0).norm();
        CHECK(gn <= prev);
        prev = gn;
    }
    double prevG = 1e300;
    for (double x = 0; x <= 40; x += 2)
    {
        const auto ch = assemble_channels(sc, hover(sc, x, 0));
        CHECK(ch.G_UR[0].norm() <= prevG);
        prevG = ch.G_UR[0].norm();
    }
}

TEST_CASE("Channel assembly is pure")
{
    Scenario sc;
    Trajectory Q;
    for (int t = 0; t < sc.T; ++t) Q.q.push_back(sc.at_altitude(-10 + 0.4 * t, 10 - 0.2 * t));
    const auto a = assemble_channels(sc, Q);
    const auto b = assemble_channels(sc, Q);
    for (std::size_t i = 0; i < a.g.size(); ++i) CHECK(a.g[i] == b.g[i]);
    for (std::size_t t = 0; t < a.G_UR.size(); ++t) CHECK(a.G_UR[t] == b.G_UR[t]);
    CHECK(geometry_table(a).str() == geometry_table(b).str());
    CHECK(geometry_table(a).rows() == static_cast<std::size_t>(sc.K * sc.T));
}

TEST_CASE("Trajectory length must match the slot count")
{
    Scenario sc;
    CHECK_THROWS_AS(assemble_channels(sc, Trajectory{{sc.q1}}), std::invalid_argument);
}
