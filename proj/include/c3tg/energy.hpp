// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>

#include "c3tg/correlation.hpp"
#include "c3tg/scoring.hpp"

namespace c3tg {

/// Composite energy of one text: weighted target deviations plus weighted
/// stability shifts, with per-dimension diagnostics for the feedback step.
struct EnergyBreakdown {
    double classify_term = 0.0;
    double overlap_term = 0.0;
    double total = 0.0;
    std::map<std::string, double> deviations;  // |C_i(x) - T_i| for every active dim
    std::map<std::string, double> shifts;      // |C_j(x) - C_j(x_prev)| per dim

    bool operator==(const EnergyBreakdown&) const = default;
};

struct ClassifyResult {
    double value = 0.0;
    std::map<std::string, double> deviations;
};

struct OverlapResult {
    double value = 0.0;
    std::map<std::string, double> shifts;
};

/// sum over primary-optimization dims of alpha_i * |C_i(x) - T_i|.
/// Deviations are recorded for every active dim regardless of role, since
/// the feedback step needs the full picture.
ClassifyResult classify_term(const ScoreVector& scores, std::span<const AttributeSpec> specs);

/// sum over constrained dims of beta_j * |C_j(x) - C_j(x_prev)|. Shifts are
/// recorded for every dim present in both score vectors.
OverlapResult overlap_penalty(const ScoreVector& scores, const ScoreVector& prev_scores,
                              const PenaltyConfig& penalty,
                              const std::set<std::string>& constrained);

/// Full Eq.-style energy. `prev_scores` is absent on the first evaluation
/// of a run, in which case the overlap term is 0 by definition.
EnergyBreakdown total_energy(const ScoreVector& scores,
                             const std::optional<ScoreVector>& prev_scores,
                             std::span<const AttributeSpec> specs,
                             const PenaltyConfig& penalty,
                             const std::set<std::string>& constrained);

}  // namespace c3tg
