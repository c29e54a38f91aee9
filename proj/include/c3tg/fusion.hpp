// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "c3tg/random.hpp"

namespace c3tg {

/// Finite ordered token inventory shared by all distributions in one run.
/// Identity (not content) decides whether two distributions are comparable.
class Vocabulary {
public:
    explicit Vocabulary(std::vector<std::string> tokens);

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(std::size_t index) const { return tokens_.at(index); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::optional<std::size_t> index_of(std::string_view token) const;

private:
    std::vector<std::string> tokens_;
};

using VocabularyPtr = std::shared_ptr<const Vocabulary>;

VocabularyPtr make_vocabulary(std::vector<std::string> tokens);

/// Normalized probability vector over a Vocabulary. Construction validates
/// non-negativity and that the mass sums to 1 within 1e-9.
class TokenDistribution {
public:
    TokenDistribution(VocabularyPtr vocab, std::vector<double> probs);

    const VocabularyPtr& vocab() const { return vocab_; }
    std::span<const double> probs() const { return probs_; }
    double prob(std::size_t index) const { return probs_.at(index); }
    std::size_t size() const { return probs_.size(); }

private:
    VocabularyPtr vocab_;
    std::vector<double> probs_;
};

/// Attribute priors Q_i with importance weights lambda_i. At least one
/// lambda must be positive and all priors must share one vocabulary.
struct AttributePriorSet {
    std::vector<TokenDistribution> priors;
    std::vector<double> lambdas;

    /// Throws ContractViolation when any invariant is broken.
    void validate() const;
    double total_lambda() const;
};

/// Every prior is smoothed by this epsilon (add + renormalize) before
/// fusion and KL computation, so a single zero entry cannot annihilate a
/// token in the geometric mean.
inline constexpr double kPriorSmoothingEpsilon = 1e-12;

/// Returns a copy with `epsilon` added to every entry, renormalized.
TokenDistribution smoothed(const TokenDistribution& dist,
                           double epsilon = kPriorSmoothingEpsilon);

/// sum_x p(x) * log(p(x) / q(x)); q is smoothed internally so p's support
/// is always covered. Zero-probability terms of p contribute 0.
double kl_divergence(const TokenDistribution& p, const TokenDistribution& q);

/// sum_i lambda_i * KL(p || Q_i) — the fusion objective.
double weighted_kl_objective(const TokenDistribution& p, const AttributePriorSet& priors);

/// Minimizer of the weighted-KL objective: the normalized weighted
/// geometric mean prod_i Q_i(x)^{lambda_i/Lambda}. Computed in log space
/// (max-shifted) to avoid underflow.
TokenDistribution fuse_distributions(const AttributePriorSet& priors);

/// Inverse-CDF draw with cumulative sums in vocabulary index order.
std::size_t sample_token(const TokenDistribution& dist, RngState& rng);

/// Supplies a next-token prior for a given context of token indices.
class ConditionalPriorProvider {
public:
    virtual ~ConditionalPriorProvider() = default;
    virtual TokenDistribution prior(std::span<const std::size_t> context) const = 0;
    virtual const VocabularyPtr& vocab() const = 0;
};

/// Autoregressively extends `context` by `length` tokens, fusing the
/// providers' priors with the given lambdas at every step.
std::vector<std::size_t> generate_sequence(
    std::span<const ConditionalPriorProvider* const> providers,
    std::span<const double> lambdas,
    std::vector<std::size_t> context,
    std::size_t length,
    RngState& rng);

}  // namespace c3tg
