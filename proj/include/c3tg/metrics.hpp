// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "c3tg/ngram.hpp"
#include "c3tg/scoring.hpp"

namespace c3tg {

/// Evaluation bundle attached to run reports. `perplexity` is an n-gram
/// proxy and is labelled ppl_proxy everywhere it is serialized.
struct MetricReport {
    std::map<int, double> distinct;  // n -> distinct-n
    double ppl_proxy = 0.0;
    double drift = 0.0;
    double avg_abs_bias = 0.0;

    bool operator==(const MetricReport&) const = default;
};

/// unique n-grams / total n-grams. Requires at least n tokens.
double distinct_n(std::span<const std::string> tokens, int n);

/// exp(-(1/T) * sum log p(token | context)) under the model's add-k
/// smoothing. Requires a non-empty sequence.
double ngram_perplexity(std::span<const std::string> tokens, const NGramModel& model);

/// Mean absolute score change over non-target dims.
double drift(const ScoreVector& scores, const ScoreVector& baseline_scores,
             const std::set<std::string>& target_dims);

/// Mean |C_i(x) - T_i| over target dims.
double average_abs_bias(const ScoreVector& scores, std::span<const AttributeSpec> specs,
                        const std::set<std::string>& target_dims);

}  // namespace c3tg
