// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "c3tg/config.hpp"
#include "c3tg/metrics.hpp"
#include "c3tg/ngram.hpp"
#include "c3tg/report.hpp"

namespace c3tg {

// --- file helpers -----------------------------------------------------

/// One text per line; blank lines are skipped with a warning on stderr.
std::vector<std::string> load_corpus(const std::string& path);

/// Writes via a temp file in the same directory plus rename.
void atomic_write_file(const std::string& path, const std::string& content);

/// CSV with a header row of attribute ids, one row of scores per text.
ScoreSampleMatrix read_score_samples_csv(const std::string& path);

std::string correlation_matrix_csv(const CorrelationMatrix& matrix);
CorrelationMatrix read_correlation_matrix_csv(const std::string& path);

/// CSV with header `logit,label`.
void read_calibration_csv(const std::string& path, std::vector<double>& logits,
                          std::vector<int>& labels);

// --- composed operations ----------------------------------------------

/// The 13-value convergence-threshold grid used by the sweep harness.
std::vector<double> default_tau_grid();
/// The grid's designated default threshold (0.025).
inline constexpr double kDefaultTau = 0.025;

/// Loads scorers, backend, penalty matrix and templates once, then runs
/// texts against them.
class Harness {
public:
    explicit Harness(RunConfig config);

    const RunConfig& config() const { return config_; }

    /// Full optimization loop on one text, with metrics attached.
    RunReport run_text(const std::string& input_text,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

    /// Baseline arm: a single strength-list prompt, one rewrite, no
    /// acceptance filter.
    RunReport one_shot_text(const std::string& input_text,
                            std::optional<std::uint64_t> seed_override = std::nullopt);

private:
    RunReport finish_report(OptimizationResult result, const std::string& input_text,
                            std::uint64_t seed);
    MetricReport compute_metrics(const std::string& final_text, const ScoreVector& final_scores,
                                 const ScoreVector& initial_scores,
                                 const std::string& initial_text) const;

    RunConfig config_;
    ScorerRegistry scorers_;
    std::shared_ptr<Rewriter> rewriter_;
    PenaltySource penalty_;
    PromptTemplates templates_;
    std::optional<NGramModel> ppl_model_;
};

struct TauSweepRow {
    double tau = 0.0;
    double mean_avg_abs_bias = 0.0;
    double mean_accepted_iterations = 0.0;
    double mean_attempts = 0.0;
    bool is_default = false;
};

std::vector<TauSweepRow> sweep_tau(const RunConfig& config, const std::vector<double>& taus,
                                   const std::vector<std::string>& corpus);
std::string tau_sweep_csv(const std::vector<TauSweepRow>& rows);

enum class ConflictScenario { conflict, overlap };

ConflictScenario conflict_scenario_from_string(const std::string& name);
const char* to_string(ConflictScenario scenario);

/// Attribute set of the scenario: the target pair plus the four fixed
/// mid-range dims, all optimizable.
std::vector<AttributeSpec> scenario_attributes(ConflictScenario scenario);
/// The two dims whose targets define the scenario.
std::vector<std::string> scenario_target_dims(ConflictScenario scenario);

struct ArmMetrics {
    double avg_abs_bias = 0.0;
    double ppl_proxy = 0.0;
    double drift = 0.0;
    int accepted_iterations = 0;
    std::string status;
};

struct ConflictRow {
    std::size_t index = 0;
    ArmMetrics full_loop;
    ArmMetrics one_shot;
};

struct ConflictSummary {
    ConflictScenario scenario = ConflictScenario::conflict;
    std::vector<ConflictRow> rows;
    ArmMetrics full_loop_mean;
    ArmMetrics one_shot_mean;
    double fraction_bias_improved = 0.0;   // full strictly below one-shot
    double fraction_drift_improved = 0.0;
    std::string one_shot_prompt_example;
};

ConflictSummary run_conflict(const RunConfig& base_config, ConflictScenario scenario,
                             const std::vector<std::string>& corpus);
nlohmann::json conflict_summary_json(const ConflictSummary& summary);
std::string conflict_rows_csv(const ConflictSummary& summary);

struct CSweepRow {
    double c = 0.0;
    double mean_avg_abs_bias = 0.0;
    double mean_drift = 0.0;
    double mean_accepted_iterations = 0.0;
};

/// Penalty-strength grid search: re-runs the corpus for every c in
/// penalty_c_grid().
std::vector<CSweepRow> sweep_penalty_c(const RunConfig& config,
                                       const std::vector<std::string>& corpus);
std::string c_sweep_csv(const std::vector<CSweepRow>& rows);

/// Correlation + beta derivation over a scored corpus CSV.
struct CorrelateOutput {
    CorrelationMatrix matrix;
    std::map<std::string, PenaltyConfig> betas_by_target;
};

CorrelateOutput correlate_scores(const ScoreSampleMatrix& samples,
                                 const std::vector<std::string>& target_dims, double c);
nlohmann::json betas_json(const CorrelateOutput& output, double c);

}  // namespace c3tg
