// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "c3tg/errors.hpp"
#include "c3tg/random.hpp"
#include "c3tg/text.hpp"

namespace c3tg {

const char* to_string(OptimizationStage stage) {
    switch (stage) {
        case OptimizationStage::core_calibration: return "core_calibration";
        case OptimizationStage::balancing: return "balancing";
        case OptimizationStage::global_finetune: return "global_finetune";
    }
    return "unknown";
}

OptimizationStage optimization_stage_from_string(const std::string& name) {
    if (name == "core_calibration") return OptimizationStage::core_calibration;
    if (name == "balancing") return OptimizationStage::balancing;
    if (name == "global_finetune") return OptimizationStage::global_finetune;
    throw ValidationError("unknown optimization stage '" + name + "'");
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::converged: return "converged";
        case RunStatus::early_stopped: return "early_stopped";
        case RunStatus::exhausted: return "exhausted";
        case RunStatus::backend_failure: return "backend_failure";
    }
    return "unknown";
}

const char* to_string(TerminationCheck check) {
    switch (check) {
        case TerminationCheck::continue_run: return "continue";
        case TerminationCheck::converged: return "converged";
        case TerminationCheck::early_stopped: return "early_stopped";
        case TerminationCheck::exhausted: return "exhausted";
    }
    return "unknown";
}

RunStatus run_status_from_string(const std::string& name) {
    if (name == "converged") return RunStatus::converged;
    if (name == "early_stopped") return RunStatus::early_stopped;
    if (name == "exhausted") return RunStatus::exhausted;
    if (name == "backend_failure") return RunStatus::backend_failure;
    throw ValidationError("unknown run status '" + name + "'");
}

void OptimizationConfig::validate() const {
    if (!(tau > 0.0)) throw ValidationError("OptimizationConfig: tau must be > 0");
    if (max_iterations < 1) throw ValidationError("OptimizationConfig: max_iterations must be >= 1");
    if (attempts_per_iteration < 1) {
        throw ValidationError("OptimizationConfig: attempts_per_iteration must be >= 1");
    }
    if (early_stop_consecutive < 1) {
        throw ValidationError("OptimizationConfig: early_stop_consecutive must be >= 1");
    }
    if (early_stop_tau.has_value() && !(*early_stop_tau > 0.0)) {
        throw ValidationError("OptimizationConfig: early_stop_tau must be > 0");
    }
}

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.core_calibration =
        "Please rewrite the following story so that it better aligns with the following "
        "attributes (numbers indicate desired strength): {directives}. Preserve the rest of the "
        "content. Output only the rewritten story.\n\n{source_text}";
    t.balancing =
        "Please modify the following story with these precise adjustments: {directives}. Keep "
        "every other attribute unchanged. Output only the rewritten story.\n\n{source_text}";
    t.global_finetune =
        "Please polish the following story with final per-attribute fine-tuning: {directives}. "
        "Keep the text otherwise stable. Output only the rewritten story.\n\n{source_text}";
    t.one_shot =
        "Please rewrite the following story so that it simultaneously exhibits the following "
        "attributes (numbers indicate desired strength): {directives}. Output only the rewritten "
        "story.\n\n{source_text}";
    return t;
}

const std::string& PromptTemplates::for_stage(OptimizationStage stage) const {
    switch (stage) {
        case OptimizationStage::core_calibration: return core_calibration;
        case OptimizationStage::balancing: return balancing;
        case OptimizationStage::global_finetune: return global_finetune;
    }
    return core_calibration;
}

namespace {

const AttributeSpec& spec_for(std::span<const AttributeSpec> specs, const std::string& id) {
    for (const auto& spec : specs) {
        if (spec.id == id) return spec;
    }
    throw ContractViolation("no attribute spec for dimension '" + id + "'");
}

double deviation_for(const EnergyBreakdown& breakdown, const std::string& id) {
    const auto it = breakdown.deviations.find(id);
    if (it == breakdown.deviations.end()) {
        throw ContractViolation("no recorded deviation for dimension '" + id + "'");
    }
    return it->second;
}

/// "0.7", "1.0": always at least one decimal digit, shortest otherwise.
std::string format_strength(double value) {
    std::string s = format_double(value);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

RewriteDirective make_directive(const AttributeSpec& spec, double score,
                                const OptimizationConfig& config) {
    RewriteDirective d;
    d.dim = spec.id;
    if (score < spec.target) {
        d.direction = AdjustDirection::increase;
    } else if (score > spec.target) {
        d.direction = AdjustDirection::decrease;
    } else {
        d.direction = AdjustDirection::maintain;
        return d;
    }
    const double deviation = std::abs(score - spec.target);
    d.intensity = deviation >= config.significant_threshold ? AdjustIntensity::significant
                                                            : AdjustIntensity::slight;
    return d;
}

std::string render_strength_entry(const RewriteDirective& directive,
                                  std::span<const AttributeSpec> specs) {
    const AttributeSpec& spec = spec_for(specs, directive.dim);
    return display_name(directive.dim) + " " + format_strength(spec.target);
}

std::string render_adjustment_entry(const RewriteDirective& directive,
                                    std::span<const AttributeSpec> specs) {
    if (directive.direction == AdjustDirection::maintain) {
        return "maintain " + display_name(directive.dim);
    }
    const AttributeSpec& spec = spec_for(specs, directive.dim);
    std::string out = to_string(*directive.intensity);
    out += " ";
    out += to_string(directive.direction);
    out += " " + display_name(directive.dim) + " toward " + format_strength(spec.target);
    return out;
}

std::string replace_all(std::string text, const std::string& needle,
                        const std::string& replacement) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), replacement);
        pos += replacement.size();
    }
    return text;
}

std::string render_template(const std::string& tmpl, const std::string& directives,
                            const std::string& source_text) {
    return replace_all(replace_all(tmpl, "{directives}", directives), "{source_text}",
                       source_text);
}

}  // namespace

std::vector<std::string> deviation_queue(const EnergyBreakdown& breakdown,
                                         std::span<const AttributeSpec> specs) {
    if (breakdown.deviations.empty()) {
        throw ContractViolation("deviation_queue: breakdown has no deviations");
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& spec : specs) {
        if (spec.role != AttributeRole::primary_optimization) continue;
        ranked.emplace_back(spec.alpha * deviation_for(breakdown, spec.id), spec.id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> queue;
    queue.reserve(ranked.size());
    for (auto& [_, id] : ranked) queue.push_back(std::move(id));
    return queue;
}

RewritePrompt build_prompt(const OptimizationState& state, const StageSpec& stage,
                           std::span<const std::string> queue,
                           std::span<const AttributeSpec> specs,
                           const OptimizationConfig& config, const PromptTemplates& templates) {
    if (queue.empty() && stage.stage != OptimizationStage::global_finetune) {
        throw ContractViolation("build_prompt: empty queue outside the global fine-tune stage");
    }
    RewritePrompt prompt;
    prompt.template_id = stage.stage;
    prompt.source_text = state.current_text;

    const EnergyBreakdown& latest = state.energy_trajectory.back();
    auto score_of = [&](const std::string& dim) {
        const auto it = state.current_scores.scores.find(dim);
        if (it == state.current_scores.scores.end()) {
            throw ContractViolation("build_prompt: missing score for dimension '" + dim + "'");
        }
        return it->second;
    };

    for (const auto& dim : queue) {
        const AttributeSpec& spec = spec_for(specs, dim);
        if (stage.stage == OptimizationStage::global_finetune &&
            deviation_for(latest, dim) <= config.residual_threshold) {
            continue;
        }
        prompt.directives.push_back(make_directive(spec, score_of(dim), config));
    }
    if (stage.stage == OptimizationStage::balancing) {
        for (const auto& dim : stage.constrained_dims) {
            const auto shift_it = latest.shifts.find(dim);
            if (shift_it != latest.shifts.end() &&
                shift_it->second > config.maintain_shift_threshold) {
                RewriteDirective d;
                d.dim = dim;
                d.direction = AdjustDirection::maintain;
                prompt.directives.push_back(std::move(d));
            }
        }
    }

    std::vector<std::string> rendered_entries;
    rendered_entries.reserve(prompt.directives.size());
    for (const auto& directive : prompt.directives) {
        rendered_entries.push_back(stage.stage == OptimizationStage::core_calibration
                                       ? render_strength_entry(directive, specs)
                                       : render_adjustment_entry(directive, specs));
    }
    prompt.rendered = render_template(templates.for_stage(stage.stage),
                                      join(rendered_entries, ", "), prompt.source_text);
    return prompt;
}

RewritePrompt build_one_shot_prompt(const std::string& source_text,
                                    const ScoreVector& initial_scores,
                                    std::span<const AttributeSpec> specs,
                                    const PromptTemplates& templates) {
    RewritePrompt prompt;
    prompt.template_id = OptimizationStage::core_calibration;
    prompt.source_text = source_text;
    std::vector<std::string> rendered_entries;
    for (const auto& spec : specs) {  // specs arrive in id order from config
        if (spec.role == AttributeRole::inactive) continue;
        const auto score_it = initial_scores.scores.find(spec.id);
        if (score_it == initial_scores.scores.end()) {
            throw ContractViolation("build_one_shot_prompt: missing score for dimension '" +
                                    spec.id + "'");
        }
        RewriteDirective d;
        d.dim = spec.id;
        if (score_it->second < spec.target) {
            d.direction = AdjustDirection::increase;
            d.intensity = AdjustIntensity::significant;
        } else if (score_it->second > spec.target) {
            d.direction = AdjustDirection::decrease;
            d.intensity = AdjustIntensity::significant;
        } else {
            d.direction = AdjustDirection::maintain;
        }
        prompt.directives.push_back(std::move(d));
        rendered_entries.push_back(display_name(spec.id) + " " + format_strength(spec.target));
    }
    if (prompt.directives.empty()) {
        throw ContractViolation("build_one_shot_prompt: no active dimensions");
    }
    prompt.rendered = render_template(templates.one_shot, join(rendered_entries, ", "),
                                      source_text);
    return prompt;
}

ProposalOutcome propose_and_evaluate(OptimizationState& state, const RewritePrompt& prompt,
                                     Rewriter& rewriter, const ScorerRegistry& scorers,
                                     const EnergyContext& ctx, const RewriteRequest& request,
                                     std::uint64_t attempt_seed) {
    state.attempt_counter += 1;
    ProposalOutcome out;
    std::string candidate;
    try {
        candidate = rewriter.rewrite(request, prompt.directives, attempt_seed);
        if (candidate.empty()) {
            throw BackendError(BackendError::Kind::empty_output, "rewriter returned empty text");
        }
    } catch (const BackendError& e) {
        out.reject_cause = std::string("backend:") + e.kind_name() + ": " + e.what();
        return out;
    }
    out.candidate_text = candidate;

    const ScoreVector candidate_scores = score_all(candidate, scorers);
    EnergyBreakdown breakdown = total_energy(candidate_scores, state.current_scores, ctx.specs,
                                             ctx.penalty, ctx.constrained);
    out.candidate_energy = breakdown;

    if (breakdown.total < state.best_energy) {
        state.best_energy = breakdown.total;
        state.best_text = candidate;
    }

    const double incumbent = state.energy_trajectory.back().total;
    if (breakdown.total < incumbent) {
        state.prev_scores = state.current_scores;
        state.current_scores = candidate_scores;
        state.current_text = candidate;
        state.energy_trajectory.push_back(std::move(breakdown));
        state.iteration += 1;
        out.accepted = true;
    } else {
        out.reject_cause = "higher_energy";
    }
    return out;
}

TerminationCheck check_termination(const OptimizationState& state,
                                   const OptimizationConfig& config) {
    if (state.energy_trajectory.empty()) {
        throw ContractViolation("check_termination: no accepted evaluation yet");
    }
    // Absolute threshold wins over the relative-improvement streak when
    // both fire in one step.
    if (state.energy_trajectory.back().total <= config.tau) {
        return TerminationCheck::converged;
    }
    if (state.early_stop_streak >= config.early_stop_consecutive) {
        return TerminationCheck::early_stopped;
    }
    if (state.total_stages > 0 && state.stage_index >= state.total_stages) {
        return TerminationCheck::exhausted;
    }
    return TerminationCheck::continue_run;
}

std::vector<StageSpec> default_stage_plan(const EnergyBreakdown& initial,
                                          std::span<const AttributeSpec> specs,
                                          const OptimizationConfig& config) {
    std::vector<std::string> eligible;
    std::vector<std::string> always_constrained;
    for (const auto& spec : specs) {
        if (spec.role == AttributeRole::primary_optimization) eligible.push_back(spec.id);
        if (spec.role == AttributeRole::stability_constrained) {
            always_constrained.push_back(spec.id);
        }
    }
    if (eligible.empty()) {
        throw ConfigurationError("default_stage_plan: no optimizable dimensions");
    }

    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& id : eligible) {
        ranked.emplace_back(spec_for(specs, id).alpha * deviation_for(initial, id), id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    auto constrained_complement = [&](const std::vector<std::string>& primaries) {
        std::set<std::string> primary_set(primaries.begin(), primaries.end());
        std::vector<std::string> constrained;
        for (const auto& id : eligible) {
            if (!primary_set.count(id)) constrained.push_back(id);
        }
        for (const auto& id : always_constrained) constrained.push_back(id);
        return constrained;
    };

    std::vector<StageSpec> plan;

    StageSpec stage1;
    stage1.stage = OptimizationStage::core_calibration;
    for (std::size_t i = 0; i < ranked.size() && i < 2; ++i) {
        stage1.primary_dims.push_back(ranked[i].second);
    }
    stage1.constrained_dims = constrained_complement(stage1.primary_dims);
    plan.push_back(stage1);

    StageSpec stage2;
    stage2.stage = OptimizationStage::balancing;
    {
        std::set<std::string> in_stage1(stage1.primary_dims.begin(), stage1.primary_dims.end());
        for (const auto& [weighted, id] : ranked) {
            (void)weighted;
            if (in_stage1.count(id)) continue;
            if (deviation_for(initial, id) > config.residual_threshold) {
                stage2.primary_dims.push_back(id);
            }
        }
    }
    if (!stage2.primary_dims.empty()) {
        stage2.constrained_dims = constrained_complement(stage2.primary_dims);
        plan.push_back(stage2);
    }

    StageSpec stage3;
    stage3.stage = OptimizationStage::global_finetune;
    stage3.primary_dims = eligible;
    stage3.constrained_dims = always_constrained;
    plan.push_back(stage3);

    return plan;
}

void validate_stage_plan(std::span<const StageSpec> plan, std::span<const AttributeSpec> specs) {
    if (plan.empty()) throw ValidationError("stage plan: empty");
    std::set<std::string> active;
    for (const auto& spec : specs) {
        if (spec.role != AttributeRole::inactive) active.insert(spec.id);
    }
    std::set<std::string> primary_somewhere;
    std::set<std::string> constrained_everywhere = active;
    for (const auto& stage : plan) {
        std::set<std::string> primaries(stage.primary_dims.begin(), stage.primary_dims.end());
        std::set<std::string> constrained(stage.constrained_dims.begin(),
                                          stage.constrained_dims.end());
        for (const auto& dim : primaries) {
            if (constrained.count(dim)) {
                throw ValidationError("stage plan: dimension '" + dim +
                                      "' is both primary and constrained in stage " +
                                      to_string(stage.stage));
            }
            if (!active.count(dim)) {
                throw ValidationError("stage plan: unknown or inactive dimension '" + dim + "'");
            }
            primary_somewhere.insert(dim);
        }
        for (const auto& dim : constrained) {
            if (!active.count(dim)) {
                throw ValidationError("stage plan: unknown or inactive dimension '" + dim + "'");
            }
        }
        std::set<std::string> covered = primaries;
        covered.insert(constrained.begin(), constrained.end());
        if (covered != active) {
            throw ValidationError(std::string("stage plan: stage ") + to_string(stage.stage) +
                                  " does not cover every active dimension");
        }
        std::set<std::string> still;
        std::set_intersection(constrained_everywhere.begin(), constrained_everywhere.end(),
                              constrained.begin(), constrained.end(),
                              std::inserter(still, still.begin()));
        constrained_everywhere = std::move(still);
    }
    for (const auto& dim : active) {
        if (!primary_somewhere.count(dim) && !constrained_everywhere.count(dim)) {
            throw ValidationError("stage plan: dimension '" + dim +
                                  "' is never primary and not constrained in every stage");
        }
    }
}

namespace {

std::vector<AttributeSpec> apply_stage_roles(std::span<const AttributeSpec> specs,
                                             const StageSpec& stage) {
    std::set<std::string> primaries(stage.primary_dims.begin(), stage.primary_dims.end());
    std::set<std::string> constrained(stage.constrained_dims.begin(),
                                      stage.constrained_dims.end());
    std::vector<AttributeSpec> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        AttributeSpec adjusted = spec;
        if (spec.role != AttributeRole::inactive) {
            if (primaries.count(spec.id)) {
                adjusted.role = AttributeRole::primary_optimization;
            } else if (constrained.count(spec.id)) {
                adjusted.role = AttributeRole::stability_constrained;
            }
        }
        out.push_back(std::move(adjusted));
    }
    return out;
}

bool has_actionable_directive(const RewritePrompt& prompt) {
    for (const auto& d : prompt.directives) {
        if (d.direction != AdjustDirection::maintain) return true;
    }
    return false;
}

}  // namespace

OptimizationResult run_optimization(const std::string& initial_text, const RunInputs& inputs,
                                    Rewriter& rewriter, const ScorerRegistry& scorers) {
    inputs.config.validate();
    std::set<std::string> seen_ids;
    for (const auto& spec : inputs.specs) {
        spec.validate();
        if (!seen_ids.insert(spec.id).second) {
            throw ValidationError("duplicate attribute id '" + spec.id + "'");
        }
    }
    require_scorers(inputs.specs, scorers);

    OptimizationResult result;
    result.seed = inputs.config.seed;
    result.initial_text = initial_text;

    OptimizationState state;
    state.current_text = initial_text;
    state.current_scores = score_all(initial_text, scorers);

    PenaltyConfig no_penalty;
    no_penalty.c = inputs.penalty.c;
    EnergyBreakdown initial = total_energy(state.current_scores, std::nullopt, inputs.specs,
                                           no_penalty, {});
    state.energy_trajectory.push_back(initial);
    state.best_text = initial_text;
    state.best_energy = initial.total;
    result.per_iteration.push_back(IterationRecord{0, state.current_scores.text_hash,
                                                   state.current_scores, initial});

    const std::vector<StageSpec> plan =
        inputs.config.stage_plan.empty()
            ? default_stage_plan(initial, inputs.specs, inputs.config)
            : inputs.config.stage_plan;
    validate_stage_plan(plan, inputs.specs);
    state.total_stages = static_cast<int>(plan.size());

    auto finalize = [&](RunStatus status, const std::string& text, double energy) {
        result.status = status;
        result.final_text = text;
        result.final_energy = energy;
        result.energy_trajectory = state.energy_trajectory;
        result.accepted_iterations = state.iteration;
        result.total_attempts = state.attempt_counter;
        result.final_scores = (text == state.current_text) ? state.current_scores
                                                           : score_all(text, scorers);
        return result;
    };

    if (check_termination(state, inputs.config) == TerminationCheck::converged) {
        return finalize(RunStatus::converged, state.current_text, initial.total);
    }

    for (std::size_t stage_index = 0; stage_index < plan.size(); ++stage_index) {
        state.stage_index = static_cast<int>(stage_index);
        const StageSpec& stage = plan[stage_index];
        if (stage.primary_dims.empty()) continue;

        const std::vector<AttributeSpec> stage_specs = apply_stage_roles(inputs.specs, stage);
        EnergyContext ctx;
        ctx.specs = stage_specs;
        ctx.penalty = derive_betas_multi(inputs.penalty.matrix, stage.primary_dims,
                                         inputs.penalty.c);
        ctx.constrained.insert(stage.constrained_dims.begin(), stage.constrained_dims.end());

        for (int iter = 1; iter <= inputs.config.max_iterations; ++iter) {
            const std::vector<std::string> queue =
                deviation_queue(state.energy_trajectory.back(), ctx.specs);
            const RewritePrompt prompt = build_prompt(state, stage, queue, ctx.specs,
                                                      inputs.config, inputs.templates);
            if (!has_actionable_directive(prompt)) break;  // stage goals met
            result.prompts.push_back(PromptLogEntry{static_cast<int>(stage_index), stage.stage,
                                                    iter, prompt.directives, prompt.rendered});

            bool accepted = false;
            int backend_failures = 0;
            for (int attempt = 1; attempt <= inputs.config.attempts_per_iteration; ++attempt) {
                RewriteRequest request;
                request.prompt = prompt.rendered;
                request.source_text = state.current_text;
                request.max_tokens = inputs.rewrite_params.max_tokens;
                request.temperature = inputs.rewrite_params.temperature;
                request.request_id = inputs.run_id + "-s" + std::to_string(stage_index) + "-i" +
                                     std::to_string(iter) + "-a" + std::to_string(attempt);

                const std::uint64_t attempt_seed = mix_seed(
                    mix_seed(mix_seed(inputs.config.seed, static_cast<std::uint64_t>(stage_index)),
                             static_cast<std::uint64_t>(iter)),
                    static_cast<std::uint64_t>(attempt));

                const double incumbent = state.energy_trajectory.back().total;
                ProposalOutcome outcome = propose_and_evaluate(state, prompt, rewriter, scorers,
                                                               ctx, request, attempt_seed);

                AttemptLogEntry log;
                log.stage_index = static_cast<int>(stage_index);
                log.iteration = iter;
                log.attempt = attempt;
                log.candidate_hash = outcome.candidate_text.empty()
                                         ? std::string()
                                         : fnv1a_hex(outcome.candidate_text);
                log.candidate_energy =
                    outcome.candidate_energy ? outcome.candidate_energy->total : -1.0;
                log.accepted = outcome.accepted;
                log.cause = outcome.reject_cause;
                result.attempts.push_back(std::move(log));

                if (!outcome.candidate_energy.has_value()) {
                    backend_failures += 1;
                    continue;
                }
                if (outcome.accepted) {
                    const double now = state.energy_trajectory.back().total;
                    const double relative = (incumbent > 0.0) ? (incumbent - now) / incumbent : 0.0;
                    if (relative < inputs.config.effective_early_stop_tau()) {
                        state.early_stop_streak += 1;
                    } else {
                        state.early_stop_streak = 0;
                    }
                    result.per_iteration.push_back(
                        IterationRecord{state.iteration, state.current_scores.text_hash,
                                        state.current_scores, state.energy_trajectory.back()});
                    accepted = true;
                    break;
                }
            }

            if (!accepted) {
                if (backend_failures == inputs.config.attempts_per_iteration) {
                    return finalize(RunStatus::backend_failure, state.best_text,
                                    state.best_energy);
                }
                result.stalled_stages.push_back(static_cast<int>(stage_index));
                break;  // advance to the next stage
            }

            const TerminationCheck check = check_termination(state, inputs.config);
            if (check == TerminationCheck::converged) {
                return finalize(RunStatus::converged, state.current_text,
                                state.energy_trajectory.back().total);
            }
            if (check == TerminationCheck::early_stopped) {
                return finalize(RunStatus::early_stopped, state.current_text,
                                state.energy_trajectory.back().total);
            }
        }
    }

    state.stage_index = state.total_stages;
    return finalize(RunStatus::exhausted, state.best_text, state.best_energy);
}

}  // namespace c3tg
