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

// Command-line entry point: optimise a design, reproduce figure data, compare efficiencies,
// and run the brute-force oracles.

#include <uavris/experiments.hpp>
#include <uavris/oracles.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace uavris;

struct CommonFlags
{
    std::string scenario;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::optional<double> tol;
    std::optional<int> max_bcd, max_sca;
};

void add_common(CLI::App *cmd, CommonFlags &f)
{
    cmd->add_option("--scenario", f.scenario, "scenario JSON file (defaults when omitted)")->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", f.out_dir, "directory for CSV and summary files")->capture_default_str();
    cmd->add_option("--seed", f.seed, "seed of the random beam initialisation")->capture_default_str();
    cmd->add_option("--tol", f.tol, "BCD relative-change tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-bcd", f.max_bcd, "maximum BCD iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--max-sca", f.max_sca, "maximum SCA iterations per BCD iteration")->check(CLI::PositiveNumber);
}

Scenario resolve(const CommonFlags &f)
{
    Scenario sc = f.scenario.empty() ? Scenario{} : load_scenario(f.scenario);
    if (f.tol) sc.tol_bcd = *f.tol;
    if (f.max_bcd) sc.i_max = *f.max_bcd;
    if (f.max_sca) sc.i_max_sca = *f.max_sca;
    validate(sc);
    std::filesystem::create_directories(f.out_dir);
    return sc;
}

std::string path(const CommonFlags &f, const std::string &name) { return (std::filesystem::path(f.out_dir) / name).string(); }

void write_text(const std::string &file, const std::string &text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + file + "'");
    out << text;
}

std::string check_lines(const std::vector<PropertyCheck> &checks)
{
    std::string s;
    for (const auto &c : checks) s += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
    return s;
}

int run_optimize(const CommonFlags &f, const std::string &scheme_name)
{
    const Scenario sc = resolve(f);
    const Scheme scheme = parse_scheme(scheme_name);
    const auto sol = optimize(sc, scheme, {f.seed, 1e-6, {}, {}});
    const auto summary = run_summary(sc, sol);
    write_text(path(f, "summary.txt"), summary);
    write_text(path(f, "scenario.json"), to_json(sc).dump(2) + "\n");
    history_table(sol).write(path(f, "history.csv"));
    schedule_table(sol).write(path(f, "schedule.csv"));
    trajectory_table(sol.trajectory).write(path(f, "trajectory.csv"));
    sca_history_table(sol).write(path(f, "sca_log.csv"));
    std::cout << summary;
    return 0;
}

int run_figure(const CommonFlags &f, int id, bool full)
{
    const Scenario sc = resolve(f);
    FigureOptions o;
    o.full = full;
    o.seed = f.seed;
    const auto fig = figure(id, sc, o);
    const auto stem = "fig" + std::to_string(id);
    fig.table.write(path(f, stem + ".csv"));
    if (!fig.runs.empty()) runs_table(fig).write(path(f, stem + "_runs.csv"));
    const auto report = check_lines(figure_properties(fig, sc));
    write_text(path(f, stem + "_properties.txt"), report);
    std::cout << "wrote " << path(f, stem + ".csv") << " (" << fig.table.rows() << " rows, " << fig.runs.size() << " runs)\n"
              << report;
    return 0;
}

int run_efficiency(const CommonFlags &f)
{
    const Scenario sc = resolve(f);
    const EfficiencySetup e;
    const auto r = efficiency_analysis(sc, e);
    r.curves.write(path(f, "efficiency.csv"));
    CsvTable cross({"scheme", "crossover_power_W", "residual", "bisection_steps", "sign_changes"});
    cross.add_row({std::string("lossless"), r.lossless.power, r.lossless.residual, static_cast<long long>(r.lossless.iterations),
                   static_cast<long long>(r.lossless_sign_changes)});
    cross.add_row({std::string("lossy"), r.lossy.power, r.lossy.residual, static_cast<long long>(r.lossy.iterations),
                   static_cast<long long>(r.lossy_sign_changes)});
    cross.write(path(f, "crossover.csv"));
    std::cout << cross.str();
    return 0;
}

int run_oracle(const CommonFlags &f, bool small)
{
    const Scenario sc = resolve(f);
    const auto checks = run_oracles(sc, f.seed, small);
    std::string report;
    bool ok = true;
    for (const auto &c : checks)
    {
        report += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
        ok = ok && c.passed;
    }
    write_text(path(f, "oracle_report.txt"), report);
    std::cout << report;
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Joint transmission, compression and trajectory design for a UAV-mounted reflecting surface"};
    app.require_subcommand(1);

    CommonFlags opt_flags, fig_flags, eff_flags, orc_flags;
    std::string scheme = "lossless";
    int fig_id = 0;
    bool full = false, small = false;

    auto *opt = app.add_subcommand("optimize", "run the BCD optimisation and write the solution");
    add_common(opt, opt_flags);
    opt->add_option("--scheme", scheme, "compression scheme")
        ->check(CLI::IsMember({"lossless", "lossy", "none"}))
        ->capture_default_str();

    auto *fig = app.add_subcommand("figure", "write the data of one figure (2..8) and check its properties");
    add_common(fig, fig_flags);
    fig->add_option("id", fig_id, "figure number")->required()->check(CLI::Range(2, 8));
    fig->add_flag("--full", full, "full-scale sweep grids");

    auto *eff = app.add_subcommand("efficiency", "efficiency curves and crossover powers");
    add_common(eff, eff_flags);

    auto *orc = app.add_subcommand("oracle", "grid-search and random-sampling oracles");
    add_common(orc, orc_flags);
    orc->add_flag("--small", small, "reduced grids");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*opt) return run_optimize(opt_flags, scheme);
        if (*fig) return run_figure(fig_flags, fig_id, full);
        if (*eff) return run_efficiency(eff_flags);
        if (*orc) return run_oracle(orc_flags, small);
    }
    catch (const ScenarioError &e)
    {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 3;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
