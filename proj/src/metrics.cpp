// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/metrics.hpp"

#include <cmath>
#include <set>

#include "c3tg/errors.hpp"

namespace c3tg {

double distinct_n(std::span<const std::string> tokens, int n) {
    if (n < 1) throw ContractViolation("distinct_n: n must be >= 1");
    if (tokens.size() < static_cast<std::size_t>(n)) {
        throw UndefinedMetricError("distinct_n: " + std::to_string(tokens.size()) +
                                   " tokens but n = " + std::to_string(n));
    }
    const std::size_t total = tokens.size() - static_cast<std::size_t>(n) + 1;
    std::set<std::vector<std::string>> unique;
    for (std::size_t i = 0; i < total; ++i) {
        unique.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

double ngram_perplexity(std::span<const std::string> tokens, const NGramModel& model) {
    if (tokens.empty()) {
        throw UndefinedMetricError("ngram_perplexity: empty token sequence");
    }
    const std::vector<std::size_t> ids = model.ids_for(tokens);
    const double logprob = model.sequence_logprob(ids);
    return std::exp(-logprob / static_cast<double>(tokens.size()));
}

double drift(const ScoreVector& scores, const ScoreVector& baseline_scores,
             const std::set<std::string>& target_dims) {
    if (scores.scores.size() != baseline_scores.scores.size()) {
        throw ContractViolation("drift: score vectors cover different dimension sets");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [dim, score] : scores.scores) {
        const auto base_it = baseline_scores.scores.find(dim);
        if (base_it == baseline_scores.scores.end()) {
            throw ContractViolation("drift: baseline missing dimension '" + dim + "'");
        }
        if (target_dims.count(dim)) continue;
        sum += std::abs(score - base_it->second);
        ++count;
    }
    if (count == 0) {
        throw UndefinedMetricError("drift: every dimension is a target dimension");
    }
    return sum / static_cast<double>(count);
}

double average_abs_bias(const ScoreVector& scores, std::span<const AttributeSpec> specs,
                        const std::set<std::string>& target_dims) {
    if (target_dims.empty()) {
        throw UndefinedMetricError("average_abs_bias: empty target dimension set");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& dim : target_dims) {
        const AttributeSpec* spec = nullptr;
        for (const auto& candidate : specs) {
            if (candidate.id == dim) {
                spec = &candidate;
                break;
            }
        }
        if (spec == nullptr) {
            throw ContractViolation("average_abs_bias: no target defined for dimension '" + dim +
                                    "'");
        }
        const auto score_it = scores.scores.find(dim);
        if (score_it == scores.scores.end()) {
            throw ContractViolation("average_abs_bias: missing score for dimension '" + dim + "'");
        }
        sum += std::abs(score_it->second - spec->target);
        ++count;
    }
    return sum / static_cast<double>(count);
}

}  // namespace c3tg
