// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "c3tg/backends.hpp"
#include "c3tg/correlation.hpp"
#include "c3tg/energy.hpp"
#include "c3tg/scoring.hpp"

namespace c3tg {

enum class OptimizationStage { core_calibration, balancing, global_finetune };

const char* to_string(OptimizationStage stage);
OptimizationStage optimization_stage_from_string(const std::string& name);

/// One entry of the refinement schedule: which dims are optimized and
/// which are held stable. The two sets are disjoint and jointly cover all
/// active dims.
struct StageSpec {
    OptimizationStage stage = OptimizationStage::core_calibration;
    std::vector<std::string> primary_dims;
    std::vector<std::string> constrained_dims;
};

struct OptimizationConfig {
    double tau = 0.025;
    int max_iterations = 3;
    int attempts_per_iteration = 4;
    int early_stop_consecutive = 2;
    std::optional<double> early_stop_tau;  // defaults to tau when unset

    // Directive thresholds. The stage narratives use the words; these pin
    // the numbers and stay overridable.
    double significant_threshold = 0.25;   // |C-T| >= this -> "significantly"
    double maintain_shift_threshold = 0.1;  // constrained shift > this -> explicit maintain
    double residual_threshold = 0.05;       // stage-3 mentions dims with |C-T| > this

    std::vector<StageSpec> stage_plan;  // empty -> derived from initial deviations
    std::uint64_t seed = 42;

    void validate() const;
    double effective_early_stop_tau() const { return early_stop_tau.value_or(tau); }
};

enum class RunStatus { converged, early_stopped, exhausted, backend_failure };
enum class TerminationCheck { continue_run, converged, early_stopped, exhausted };

const char* to_string(RunStatus status);
const char* to_string(TerminationCheck check);
RunStatus run_status_from_string(const std::string& name);

struct OptimizationState {
    int iteration = 0;    // accepted rewrites so far
    int stage_index = 0;
    int total_stages = 0;
    std::string current_text;
    ScoreVector current_scores;
    std::optional<ScoreVector> prev_scores;  // scores of the previously accepted text
    std::vector<EnergyBreakdown> energy_trajectory;  // accepted states only, initial included
    std::string best_text;
    double best_energy = 0.0;
    int attempt_counter = 0;
    int early_stop_streak = 0;
};

struct RewritePrompt {
    OptimizationStage template_id = OptimizationStage::core_calibration;
    std::vector<RewriteDirective> directives;
    std::string source_text;
    std::string rendered;
};

/// Stage prompt templates with {source_text} and {directives} placeholders.
struct PromptTemplates {
    std::string core_calibration;
    std::string balancing;
    std::string global_finetune;
    std::string one_shot;  // baseline arm: plain strength list, no feedback

    static PromptTemplates defaults();
    const std::string& for_stage(OptimizationStage stage) const;
};

/// Primary dims of `specs` sorted by alpha * deviation descending; ties
/// break toward the lexicographically smaller id.
std::vector<std::string> deviation_queue(const EnergyBreakdown& breakdown,
                                         std::span<const AttributeSpec> specs);

/// Turns the current diagnostics into a stage-appropriate rewrite prompt.
///  - stage 1 lists target strengths for the queued dims;
///  - stage 2 adds intensity-worded adjustments plus maintain directives
///    for constrained dims whose shift exceeded the threshold;
///  - stage 3 enumerates every dim with residual deviation above the
///    threshold.
RewritePrompt build_prompt(const OptimizationState& state, const StageSpec& stage,
                           std::span<const std::string> queue,
                           std::span<const AttributeSpec> specs,
                           const OptimizationConfig& config, const PromptTemplates& templates);

/// One-shot baseline prompt: a single strength list over all active dims
/// in id order, rendered with the one_shot template. Directives push each
/// off-target dim toward its target with significant intensity; the text
/// is rewritten once with no acceptance filter.
RewritePrompt build_one_shot_prompt(const std::string& source_text,
                                    const ScoreVector& initial_scores,
                                    std::span<const AttributeSpec> specs,
                                    const PromptTemplates& templates);

/// Everything needed to evaluate a candidate under the current stage.
struct EnergyContext {
    std::vector<AttributeSpec> specs;  // roles adjusted for the stage
    PenaltyConfig penalty;
    std::set<std::string> constrained;
};

struct ProposalOutcome {
    bool accepted = false;
    std::string candidate_text;
    std::optional<EnergyBreakdown> candidate_energy;  // absent on backend failure
    std::string reject_cause;  // "", "higher_energy", "backend:<kind>: ..."
};

/// Runs one rewrite attempt: candidate generation, scoring, energy
/// evaluation and the accept-if-improving decision. Rejected candidates
/// leave the state text untouched; best-so-far updates on every
/// evaluation.
ProposalOutcome propose_and_evaluate(OptimizationState& state, const RewritePrompt& prompt,
                                     Rewriter& rewriter, const ScorerRegistry& scorers,
                                     const EnergyContext& ctx, const RewriteRequest& request,
                                     std::uint64_t attempt_seed);

/// Stopping rules, checked in priority order: absolute threshold
/// (converged), relative-improvement streak (early_stopped), exhausted
/// budgets. Requires at least one accepted evaluation in the state.
TerminationCheck check_termination(const OptimizationState& state,
                                   const OptimizationConfig& config);

/// c + correlation matrix; per-stage betas derive from these.
struct PenaltySource {
    double c = kDefaultPenaltyC;
    CorrelationMatrix matrix;
};

struct RewriteParams {
    int max_tokens = 512;
    double temperature = 0.7;
};

struct PromptLogEntry {
    int stage_index = 0;
    OptimizationStage stage = OptimizationStage::core_calibration;
    int iteration = 0;
    std::vector<RewriteDirective> directives;
    std::string rendered;

    bool operator==(const PromptLogEntry&) const = default;
};

struct AttemptLogEntry {
    int stage_index = 0;
    int iteration = 0;
    int attempt = 0;
    std::string candidate_hash;
    double candidate_energy = 0.0;
    bool accepted = false;
    std::string cause;

    bool operator==(const AttemptLogEntry&) const = default;
};

struct IterationRecord {
    int index = 0;  // 0 = initial text
    std::string text_hash;
    ScoreVector scores;
    EnergyBreakdown breakdown;

    bool operator==(const IterationRecord&) const = default;
};

/// Core optimization result; the harness layers metrics and config echo
/// on top of this.
struct OptimizationResult {
    RunStatus status = RunStatus::exhausted;
    std::string final_text;
    double final_energy = 0.0;
    std::string initial_text;
    std::vector<EnergyBreakdown> energy_trajectory;
    std::vector<PromptLogEntry> prompts;
    std::vector<AttemptLogEntry> attempts;
    std::vector<IterationRecord> per_iteration;
    ScoreVector final_scores;
    std::vector<int> stalled_stages;
    int accepted_iterations = 0;
    int total_attempts = 0;
    std::uint64_t seed = 0;
};

struct RunInputs {
    std::vector<AttributeSpec> specs;
    OptimizationConfig config;
    PenaltySource penalty;
    PromptTemplates templates = PromptTemplates::defaults();
    RewriteParams rewrite_params;
    std::string run_id;  // used to derive request ids
};

/// The full three-stage loop: stage planning, per-iteration prompt
/// synthesis, accept-if-improving attempts, termination checks, and the
/// lowest-energy fallback when budgets run out.
OptimizationResult run_optimization(const std::string& initial_text, const RunInputs& inputs,
                                    Rewriter& rewriter, const ScorerRegistry& scorers);

/// Derived default schedule: stage 1 takes the two worst deviation dims,
/// stage 2 the remaining off-target dims, stage 3 every optimizable dim.
std::vector<StageSpec> default_stage_plan(const EnergyBreakdown& initial,
                                          std::span<const AttributeSpec> specs,
                                          const OptimizationConfig& config);

/// Checks stage-plan invariants against the active dims: disjoint sets,
/// full coverage per stage, and every dim either a primary somewhere or
/// constrained everywhere.
void validate_stage_plan(std::span<const StageSpec> plan, std::span<const AttributeSpec> specs);

}  // namespace c3tg
