// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface for the controlled-text-generation pipeline:
// single runs, threshold sweeps, conflict/overlap experiments, correlation
// and calibration utilities.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "c3tg/errors.hpp"
#include "c3tg/harness.hpp"

namespace {

using namespace c3tg;

void print_error(const std::string& kind, const std::string& message) {
    nlohmann::json line{{"error", kind}, {"message", message}};
    std::cerr << line.dump() << "\n";
}

std::string read_input_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open input file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    if (text.empty()) throw ValidationError("input file '" + path + "' is empty");
    return text;
}

struct CommonFlags {
    std::string config_path;
    std::string input_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<int> max_iters;
    std::optional<int> attempts;
    std::optional<std::string> backend;
    bool verbose = false;
};

void add_override_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override the run seed");
    cmd->add_option("--tau", flags.tau, "Override the convergence threshold");
    cmd->add_option("--max-iters", flags.max_iters, "Override max iterations per stage");
    cmd->add_option("--attempts", flags.attempts, "Override rewrite attempts per iteration");
    cmd->add_option("--backend", flags.backend, "Override the backend type (synthetic|http|echo)");
    cmd->add_flag("--verbose", flags.verbose, "Progress output on stderr");
}

RunConfig load_with_overrides(const CommonFlags& flags) {
    RunConfig config = RunConfig::load_file(flags.config_path);
    if (flags.seed) config.optimization.seed = *flags.seed;
    if (flags.tau) config.optimization.tau = *flags.tau;
    if (flags.max_iters) config.optimization.max_iterations = *flags.max_iters;
    if (flags.attempts) config.optimization.attempts_per_iteration = *flags.attempts;
    if (flags.backend) config.backend.type = *flags.backend;
    return config;
}

int exit_code_for(RunStatus status) {
    switch (status) {
        case RunStatus::converged:
        case RunStatus::early_stopped: return 0;
        case RunStatus::exhausted: return 2;
        case RunStatus::backend_failure: return 3;
    }
    return 1;
}

int cmd_run(const CommonFlags& flags) {
    RunConfig config = load_with_overrides(flags);
    Harness harness(config);
    const std::string input = read_input_text(flags.input_path);
    if (flags.verbose) std::cerr << "running optimization on " << flags.input_path << "\n";
    RunReport report = harness.run_text(input);
    const std::string out = flags.out_path.empty() ? "report.json" : flags.out_path;
    atomic_write_file(out, serialize_report(report));
    if (flags.verbose) {
        std::cerr << "status=" << to_string(report.status) << " energy="
                  << report.final_energy << " iterations=" << report.accepted_iterations
                  << " -> " << out << "\n";
    }
    std::cout << to_string(report.status) << "\n";
    return exit_code_for(report.status);
}

int cmd_sweep_tau(const CommonFlags& flags, const std::string& tau_csv) {
    RunConfig config = load_with_overrides(flags);
    std::vector<double> taus;
    if (tau_csv.empty()) {
        taus = default_tau_grid();
    } else {
        std::stringstream ss(tau_csv);
        std::string item;
        while (std::getline(ss, item, ',')) taus.push_back(std::stod(item));
    }
    const auto corpus = load_corpus(flags.input_path);
    if (corpus.empty()) throw ValidationError("corpus '" + flags.input_path + "' has no texts");
    if (flags.verbose) {
        std::cerr << "sweeping " << taus.size() << " tau values over " << corpus.size()
                  << " texts\n";
    }
    const auto rows = sweep_tau(config, taus, corpus);
    const std::string out = flags.out_path.empty() ? "tau_sweep.csv" : flags.out_path;
    atomic_write_file(out, tau_sweep_csv(rows));
    std::cout << out << "\n";
    return 0;
}

int cmd_conflict(const CommonFlags& flags, const std::string& scenario_name,
                 const std::string& per_text_csv) {
    RunConfig config = load_with_overrides(flags);
    const ConflictScenario scenario = conflict_scenario_from_string(scenario_name);
    const auto corpus = load_corpus(flags.input_path);
    if (corpus.empty()) throw ValidationError("corpus '" + flags.input_path + "' has no texts");
    if (flags.verbose) {
        std::cerr << "running " << to_string(scenario) << " experiment on " << corpus.size()
                  << " texts\n";
    }
    const ConflictSummary summary = run_conflict(config, scenario, corpus);
    const std::string out = flags.out_path.empty()
                                ? std::string(to_string(scenario)) + "_summary.json"
                                : flags.out_path;
    atomic_write_file(out, conflict_summary_json(summary).dump(2) + "\n");
    if (!per_text_csv.empty()) {
        atomic_write_file(per_text_csv, conflict_rows_csv(summary));
    }
    std::cout << out << "\n";
    return 0;
}

int cmd_sweep_c(const CommonFlags& flags) {
    RunConfig config = load_with_overrides(flags);
    const auto corpus = load_corpus(flags.input_path);
    if (corpus.empty()) throw ValidationError("corpus '" + flags.input_path + "' has no texts");
    const auto rows = sweep_penalty_c(config, corpus);
    const std::string out = flags.out_path.empty() ? "c_sweep.csv" : flags.out_path;
    atomic_write_file(out, c_sweep_csv(rows));
    std::cout << out << "\n";
    return 0;
}

int cmd_correlate(const std::string& scores_path, double c, const std::string& targets_csv,
                  const std::string& matrix_out, const std::string& betas_out) {
    const ScoreSampleMatrix samples = read_score_samples_csv(scores_path);
    std::vector<std::string> targets;
    if (!targets_csv.empty()) {
        std::stringstream ss(targets_csv);
        std::string item;
        while (std::getline(ss, item, ',')) targets.push_back(item);
    }
    const CorrelateOutput output = correlate_scores(samples, targets, c);
    atomic_write_file(matrix_out, correlation_matrix_csv(output.matrix));
    atomic_write_file(betas_out, betas_json(output, c).dump(2) + "\n");
    std::cout << matrix_out << " " << betas_out << "\n";
    return 0;
}

int cmd_calibrate(const std::string& calib_path, int bins, const std::string& out_path) {
    std::vector<double> logits;
    std::vector<int> labels;
    read_calibration_csv(calib_path, logits, labels);
    const CalibrationParams params = fit_temperature(logits, labels, bins);
    nlohmann::json j = params;
    atomic_write_file(out_path, j.dump(2) + "\n");
    std::cout << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "c3tg: attribute-controlled text generation via KL-fused priors and "
        "energy-guided iterative rewriting"};
    app.require_subcommand(1);
    app.footer(
        "HTTP backends read their bearer token from the environment variable named by the\n"
        "config's backend.auth_token_env (default C3TG_AUTH_TOKEN).");

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "Optimize a single input text and write a run report");
    run->add_option("--config", run_flags.config_path, "JSON run configuration")->required();
    run->add_option("--input", run_flags.input_path, "UTF-8 file with the initial text")
        ->required();
    run->add_option("--out", run_flags.out_path, "Report path (default report.json)");
    add_override_flags(run, run_flags);

    CommonFlags sweep_flags;
    std::string tau_list;
    auto* sweep = app.add_subcommand("sweep-tau",
                                     "Convergence-threshold sweep over a corpus (CSV out)");
    sweep->add_option("--config", sweep_flags.config_path, "JSON run configuration")->required();
    sweep->add_option("--input", sweep_flags.input_path, "corpus file, one text per line")
        ->required();
    sweep->add_option("--taus", tau_list, "comma-separated tau values (default: built-in grid)");
    sweep->add_option("--out", sweep_flags.out_path, "CSV path (default tau_sweep.csv)");
    add_override_flags(sweep, sweep_flags);

    CommonFlags conflict_flags;
    std::string scenario = "conflict";
    std::string per_text_csv;
    auto* conflict = app.add_subcommand(
        "conflict", "Conflict/overlap experiment: full loop vs one-shot baseline");
    conflict->add_option("--config", conflict_flags.config_path, "JSON run configuration")
        ->required();
    conflict->add_option("--input", conflict_flags.input_path, "corpus file, one text per line")
        ->required();
    conflict->add_option("--scenario", scenario, "conflict | overlap")->required();
    conflict->add_option("--out", conflict_flags.out_path, "summary JSON path");
    conflict->add_option("--per-text", per_text_csv, "optional per-text CSV path");
    add_override_flags(conflict, conflict_flags);

    CommonFlags csweep_flags;
    auto* csweep = app.add_subcommand("sweep-c",
                                      "Penalty-strength grid search over a corpus (CSV out)");
    csweep->add_option("--config", csweep_flags.config_path, "JSON run configuration")->required();
    csweep->add_option("--input", csweep_flags.input_path, "corpus file, one text per line")
        ->required();
    csweep->add_option("--out", csweep_flags.out_path, "CSV path (default c_sweep.csv)");
    add_override_flags(csweep, csweep_flags);

    std::string scores_path;
    std::string targets_csv;
    std::string matrix_out = "correlations.csv";
    std::string betas_out = "betas.json";
    double c_value = kDefaultPenaltyC;
    auto* correlate = app.add_subcommand(
        "correlate", "Pearson matrix + stability penalties from a scored-corpus CSV");
    correlate->add_option("--scores", scores_path, "CSV: header of attribute ids, one row per text")
        ->required();
    correlate->add_option("--c", c_value, "global penalty factor (default 0.3)");
    correlate->add_option("--targets", targets_csv,
                          "comma-separated target dims (default: all dims)");
    correlate->add_option("--matrix-out", matrix_out, "correlation matrix CSV path");
    correlate->add_option("--betas-out", betas_out, "betas JSON path");

    std::string calib_path;
    std::string calib_out = "calibration.json";
    int bins = 10;
    auto* calibrate = app.add_subcommand("calibrate",
                                         "Temperature scaling + ECE from a logit,label CSV");
    calibrate->add_option("--input", calib_path, "CSV with header logit,label")->required();
    calibrate->add_option("--bins", bins, "ECE bin count (default 10)");
    calibrate->add_option("--out", calib_out, "output JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep_tau(sweep_flags, tau_list);
        if (conflict->parsed()) return cmd_conflict(conflict_flags, scenario, per_text_csv);
        if (csweep->parsed()) return cmd_sweep_c(csweep_flags);
        if (correlate->parsed()) {
            return cmd_correlate(scores_path, c_value, targets_csv, matrix_out, betas_out);
        }
        if (calibrate->parsed()) return cmd_calibrate(calib_path, bins, calib_out);
    } catch (const ValidationError& e) {
        print_error("validation", e.what());
        return 1;
    } catch (const ConfigurationError& e) {
        print_error("configuration", e.what());
        return 1;
    } catch (const BackendError& e) {
        print_error(std::string("backend_") + e.kind_name(), e.what());
        return 3;
    } catch (const Error& e) {
        print_error("error", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 1;
}
