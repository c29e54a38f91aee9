// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/energy.hpp"

#include <cmath>

#include "c3tg/errors.hpp"

namespace c3tg {

namespace {

double score_for(const ScoreVector& scores, const std::string& dim, const char* where) {
    const auto it = scores.scores.find(dim);
    if (it == scores.scores.end()) {
        throw ContractViolation(std::string(where) + ": missing score for dimension '" + dim +
                                "'");
    }
    return it->second;
}

}  // namespace

ClassifyResult classify_term(const ScoreVector& scores, std::span<const AttributeSpec> specs) {
    ClassifyResult out;
    for (const auto& spec : specs) {
        if (spec.role == AttributeRole::inactive) continue;
        const double deviation = std::abs(score_for(scores, spec.id, "classify_term") - spec.target);
        out.deviations[spec.id] = deviation;
        if (spec.role == AttributeRole::primary_optimization) {
            out.value += spec.alpha * deviation;
        }
    }
    return out;
}

OverlapResult overlap_penalty(const ScoreVector& scores, const ScoreVector& prev_scores,
                              const PenaltyConfig& penalty,
                              const std::set<std::string>& constrained) {
    OverlapResult out;
    for (const auto& [dim, score] : scores.scores) {
        const auto prev_it = prev_scores.scores.find(dim);
        if (prev_it == prev_scores.scores.end()) continue;
        out.shifts[dim] = std::abs(score - prev_it->second);
    }
    for (const auto& dim : constrained) {
        const auto beta_it = penalty.betas.find(dim);
        if (beta_it == penalty.betas.end()) {
            throw ConfigurationError("overlap_penalty: constrained dimension '" + dim +
                                     "' has no beta coefficient");
        }
        const double shift = std::abs(score_for(scores, dim, "overlap_penalty") -
                                      score_for(prev_scores, dim, "overlap_penalty"));
        out.value += beta_it->second * shift;
    }
    return out;
}

EnergyBreakdown total_energy(const ScoreVector& scores,
                             const std::optional<ScoreVector>& prev_scores,
                             std::span<const AttributeSpec> specs,
                             const PenaltyConfig& penalty,
                             const std::set<std::string>& constrained) {
    EnergyBreakdown out;
    ClassifyResult classify = classify_term(scores, specs);
    out.classify_term = classify.value;
    out.deviations = std::move(classify.deviations);
    if (prev_scores.has_value()) {
        OverlapResult overlap = overlap_penalty(scores, *prev_scores, penalty, constrained);
        out.overlap_term = overlap.value;
        out.shifts = std::move(overlap.shifts);
    }
    out.total = out.classify_term + out.overlap_term;
    return out;
}

}  // namespace c3tg
