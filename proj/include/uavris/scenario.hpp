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

#include <Eigen/Core>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavris {

using Vec3 = Eigen::Vector3d;

class ScenarioError : public std::runtime_error
{
  public:
    ScenarioError(std::string key, const std::string &what)
        : std::runtime_error("scenario key '" + key + "': " + what), key_(std::move(key))
    {
    }
    const std::string &key() const noexcept { return key_; }

  private:
    std::string key_;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double linear_to_db(double g) { return 10.0 * std::log10(g); }

enum class Scheme
{
    lossless,
    lossy,
    none
};

inline const char *to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::lossless: return "lossless";
    case Scheme::lossy: return "lossy";
    case Scheme::none: return "none";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string &s)
{
    if (s == "lossless") return Scheme::lossless;
    if (s == "lossy") return Scheme::lossy;
    if (s == "none" || s == "wo") return Scheme::none;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected lossless|lossy|none)");
}

// All quantities in SI units (W, J, s, Hz, m). Frequencies f_k are expressed in
// the configured cycle unit; cycle_unit_scale converts them to cycles.
struct Scenario
{
    int M = 16; // BS antennas
    int N = 16; // RIS elements
    int K = 4;  // UEs
    int T = 50; // slots

    double delta_t = 0.04;             // s
    double P_T = dbm_to_watts(35.0);   // W
    std::vector<double> lambda{0.1, 0.1, 0.4, 0.4};

    Vec3 q0{0.0, 0.0, 0.0}; // BS, z component is z_B
    std::vector<Vec3> q{{-10.0, 10.0, 0.0}, {-10.0, 0.0, 0.0}, {10.0, 0.0, 0.0}, {10.0, 10.0, 0.0}};
    Vec3 q1{-10.0, 10.0, 8.0}; // UAV start, z component is the UAV altitude
    Vec3 qT{10.0, 10.0, 8.0};  // UAV end

    double V_max = 16.0; // m/s
    double eta_0 = 0.8;
    double B = 40e6;                      // Hz
    double sigma2_B = dbm_to_watts(-60.0); // W
    double h0 = db_to_linear(-50.0);
    double alpha_BR = 2.0;
    double alpha_BU = 4.0;
    double alpha_RU = 2.0;
    double gamma = 0.8;
    double gamma_c = 1e-7;
    double epsilon = 1.38;
    std::vector<double> kappa{0.5, 0.5, 0.5, 0.5};
    std::vector<double> kappa_bar{0.5, 0.5, 0.5, 0.5};

    double tol_bcd = 1e-3;
    double tol_sca = 1e-3;
    double tol_solver = 1e-6;
    int i_max = 20;     // BCD iterations
    int i_max_sca = 15; // SCA iterations
    int j_max = 30;     // beamforming AO sweeps
    double cycle_unit_scale = 1.0;

    double z() const { return q1.z(); }
    double z_B() const { return q0.z(); }
    double z_k(int k) const { return q[static_cast<std::size_t>(k)].z(); }
    double step_limit() const { return V_max * delta_t; }

    // UAV position on the flight plane above a horizontal point.
    Vec3 at_altitude(double x, double y) const { return {x, y, z()}; }
};

namespace detail {

inline bool finite(const Vec3 &v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

} // namespace detail

// Throws ScenarioError naming the offending key.
inline void validate(const Scenario &sc)
{
    auto require = [](bool ok, const char *key, const std::string &bound) {
        if (!ok) throw ScenarioError(key, "violates " + bound);
    };
    require(sc.M >= 1, "M", "M >= 1");
    require(sc.N >= 1, "N", "N >= 1");
    require(sc.K >= 1, "K", "K >= 1");
    require(sc.T >= 2, "T", "T >= 2");
    require(std::isfinite(sc.delta_t) && sc.delta_t > 0, "delta_t", "delta_t > 0");
    require(std::isfinite(sc.P_T) && sc.P_T > 0, "P_T_dBm", "P_T > 0");
    require(std::isfinite(sc.B) && sc.B > 0, "B_MHz", "B > 0");
    require(std::isfinite(sc.sigma2_B) && sc.sigma2_B > 0, "sigma2_B_dBm", "sigma2_B > 0");
    require(std::isfinite(sc.h0) && sc.h0 >= 0, "h0_dB", "h0 >= 0");
    require(sc.eta_0 > 0 && sc.eta_0 <= 1, "eta_0", "0 < eta_0 <= 1");
    require(sc.gamma > 0 && sc.gamma < 1, "gamma", "0 < gamma < 1");
    require(std::isfinite(sc.gamma_c) && sc.gamma_c > 0, "gamma_c", "gamma_c > 0");
    require(std::isfinite(sc.epsilon) && sc.epsilon > 0, "epsilon", "epsilon > 0");
    require(std::isfinite(sc.V_max) && sc.V_max > 0, "V_max", "V_max > 0");
    require(sc.alpha_BR >= 2, "alpha_BR", "alpha_BR >= 2");
    require(sc.alpha_BU >= 2, "alpha_BU", "alpha_BU >= 2");
    require(sc.alpha_RU >= 2, "alpha_RU", "alpha_RU >= 2");
    require(std::isfinite(sc.cycle_unit_scale) && sc.cycle_unit_scale > 0, "cycle_unit_scale", "cycle_unit_scale > 0");
    require(sc.tol_bcd > 0 && sc.tol_sca > 0 && sc.tol_solver > 0, "tol_solver", "tolerances > 0");
    require(sc.i_max >= 1, "i_max", "i_max >= 1");
    require(sc.i_max_sca >= 1, "i_max_sca", "i_max_sca >= 1");
    require(sc.j_max >= 1, "j_max", "j_max >= 1");

    const auto K = static_cast<std::size_t>(sc.K);
    require(sc.q.size() == K, "q_k", "one position per UE (K entries)");
    require(sc.lambda.size() == K, "lambda", "one weight per UE (K entries)");
    require(sc.kappa.size() == K, "kappa", "one ratio per UE (K entries)");
    require(sc.kappa_bar.size() == K, "kappa_bar", "one ratio per UE (K entries)");
    bool any_positive = false;
    for (double l : sc.lambda)
    {
        require(std::isfinite(l) && l >= 0, "lambda", "lambda_k >= 0");
        any_positive = any_positive || l > 0;
    }
    require(any_positive, "lambda", "at least one lambda_k > 0");
    for (double k : sc.kappa) require(k > 0 && k <= 1, "kappa", "kappa_k in (0,1]");
    for (double k : sc.kappa_bar) require(k > 0 && k <= 1, "kappa_bar", "kappa_bar_k in (0,1]");

    require(detail::finite(sc.q0), "q0", "finite coordinates");
    require(detail::finite(sc.q1), "q1", "finite coordinates");
    require(detail::finite(sc.qT), "qT", "finite coordinates");
    for (const auto &p : sc.q) require(detail::finite(p), "q_k", "finite coordinates");
    require(sc.q1.z() == sc.qT.z(), "qT", "same altitude as q1 (fixed UAV height)");
    require(sc.z() > sc.z_B(), "z", "z > z_B");
    for (int k = 0; k < sc.K; ++k) require(sc.z() > sc.z_k(k), "z", "z > z_k");
}

namespace detail {

inline Vec3 to_vec3(const nlohmann::json &j, const std::string &key)
{
    if (!j.is_array() || j.size() != 3) throw ScenarioError(key, "expected a 3-vector [x, y, z]");
    Vec3 v;
    for (int i = 0; i < 3; ++i)
    {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ScenarioError(key, "non-numeric coordinate");
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

inline double to_double(const nlohmann::json &j, const std::string &key)
{
    if (!j.is_number()) throw ScenarioError(key, "expected a number");
    return j.get<double>();
}

inline int to_int(const nlohmann::json &j, const std::string &key)
{
    if (!j.is_number_integer()) throw ScenarioError(key, "expected an integer");
    return j.get<int>();
}

inline std::vector<double> to_list(const nlohmann::json &j, const std::string &key)
{
    if (!j.is_array()) throw ScenarioError(key, "expected a list of numbers");
    std::vector<double> out;
    for (const auto &e : j) out.push_back(to_double(e, key));
    return out;
}

} // namespace detail

// Applies the keys of a flat JSON object on top of the defaults.
inline Scenario scenario_from_json(const nlohmann::json &j)
{
    using namespace detail;
    if (!j.is_object()) throw ScenarioError("<root>", "expected a flat key-value object");

    Scenario sc;
    bool have_K = false, have_q = false;
    double z_override = NAN, zB_override = NAN, zk_override = NAN;

    for (const auto &[key, v] : j.items())
    {
        if (key == "M") sc.M = to_int(v, key);
        else if (key == "N") sc.N = to_int(v, key);
        else if (key == "K") { sc.K = to_int(v, key); have_K = true; }
        else if (key == "T") sc.T = to_int(v, key);
        else if (key == "delta_t") sc.delta_t = to_double(v, key);
        else if (key == "P_T_dBm") sc.P_T = dbm_to_watts(to_double(v, key));
        else if (key == "lambda") sc.lambda = to_list(v, key);
        else if (key == "q0") sc.q0 = to_vec3(v, key);
        else if (key == "q_k")
        {
            if (!v.is_array()) throw ScenarioError(key, "expected a list of 3-vectors");
            sc.q.clear();
            for (const auto &p : v) sc.q.push_back(to_vec3(p, key));
            have_q = true;
        }
        else if (key == "q1") sc.q1 = to_vec3(v, key);
        else if (key == "qT") sc.qT = to_vec3(v, key);
        else if (key == "z") z_override = to_double(v, key);
        else if (key == "z_B") zB_override = to_double(v, key);
        else if (key == "z_k") zk_override = to_double(v, key);
        else if (key == "V_max") sc.V_max = to_double(v, key);
        else if (key == "eta_0") sc.eta_0 = to_double(v, key);
        else if (key == "B_MHz") sc.B = to_double(v, key) * 1e6;
        else if (key == "sigma2_B_dBm") sc.sigma2_B = dbm_to_watts(to_double(v, key));
        else if (key == "h0_dB") sc.h0 = db_to_linear(to_double(v, key));
        else if (key == "alpha_BR") sc.alpha_BR = to_double(v, key);
        else if (key == "alpha_BU") sc.alpha_BU = to_double(v, key);
        else if (key == "alpha_RU") sc.alpha_RU = to_double(v, key);
        else if (key == "gamma") sc.gamma = to_double(v, key);
        else if (key == "gamma_c") sc.gamma_c = to_double(v, key);
        else if (key == "epsilon") sc.epsilon = to_double(v, key);
        else if (key == "kappa") sc.kappa = to_list(v, key);
        else if (key == "kappa_bar") sc.kappa_bar = to_list(v, key);
        else if (key == "tol_bcd") sc.tol_bcd = to_double(v, key);
        else if (key == "tol_sca") sc.tol_sca = to_double(v, key);
        else if (key == "tol_solver") sc.tol_solver = to_double(v, key);
        else if (key == "i_max") sc.i_max = to_int(v, key);
        else if (key == "i_max_sca") sc.i_max_sca = to_int(v, key);
        else if (key == "j_max") sc.j_max = to_int(v, key);
        else if (key == "cycle_unit_scale") sc.cycle_unit_scale = to_double(v, key);
        else throw ScenarioError(key, "unknown key");
    }

    if (sc.K < 1) throw ScenarioError("K", "violates K >= 1");
    if (have_K && !have_q && static_cast<std::size_t>(sc.K) != sc.q.size())
        throw ScenarioError("K", "differs from the number of default UE positions; supply q_k");
    if (!have_K) sc.K = static_cast<int>(sc.q.size());

    // Per-UE lists left at their defaults follow a changed UE count.
    const auto K = static_cast<std::size_t>(sc.K);
    if (!j.contains("lambda") && sc.lambda.size() != K) sc.lambda.assign(K, 1.0 / static_cast<double>(K));
    if (!j.contains("kappa") && sc.kappa.size() != K) sc.kappa.assign(K, 0.5);
    if (!j.contains("kappa_bar") && sc.kappa_bar.size() != K) sc.kappa_bar.assign(K, 0.5);

    if (std::isfinite(z_override)) { sc.q1.z() = z_override; sc.qT.z() = z_override; }
    if (std::isfinite(zB_override)) sc.q0.z() = zB_override;
    if (std::isfinite(zk_override))
        for (auto &p : sc.q) p.z() = zk_override;

    validate(sc);
    return sc;
}

inline Scenario load_scenario_string(const std::string &text)
{
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return scenario_from_json(nlohmann::json::object());
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ScenarioError("<file>", std::string("parse failure: ") + e.what());
    }
    return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw ScenarioError("<file>", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario_string(ss.str());
}

inline nlohmann::json to_json(const Scenario &sc)
{
    auto v3 = [](const Vec3 &v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
    nlohmann::json qk = nlohmann::json::array();
    for (const auto &p : sc.q) qk.push_back(v3(p));
    return {{"M", sc.M},
            {"N", sc.N},
            {"K", sc.K},
            {"T", sc.T},
            {"delta_t", sc.delta_t},
            {"P_T_dBm", watts_to_dbm(sc.P_T)},
            {"lambda", sc.lambda},
            {"q0", v3(sc.q0)},
            {"q_k", qk},
            {"q1", v3(sc.q1)},
            {"qT", v3(sc.qT)},
            {"V_max", sc.V_max},
            {"eta_0", sc.eta_0},
            {"B_MHz", sc.B / 1e6},
            {"sigma2_B_dBm", watts_to_dbm(sc.sigma2_B)},
            {"h0_dB", sc.h0 > 0 ? linear_to_db(sc.h0) : -400.0},
            {"alpha_BR", sc.alpha_BR},
            {"alpha_BU", sc.alpha_BU},
            {"alpha_RU", sc.alpha_RU},
            {"gamma", sc.gamma},
            {"gamma_c", sc.gamma_c},
            {"epsilon", sc.epsilon},
            {"kappa", sc.kappa},
            {"kappa_bar", sc.kappa_bar},
            {"tol_bcd", sc.tol_bcd},
            {"tol_sca", sc.tol_sca},
            {"tol_solver", sc.tol_solver},
            {"i_max", sc.i_max},
            {"i_max_sca", sc.i_max_sca},
            {"j_max", sc.j_max},
            {"cycle_unit_scale", sc.cycle_unit_scale}};
}

} // namespace uavris
