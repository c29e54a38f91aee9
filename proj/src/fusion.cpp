// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "c3tg/errors.hpp"

namespace c3tg {

namespace {

constexpr double kMassTolerance = 1e-9;

void check_same_vocab(const TokenDistribution& a, const TokenDistribution& b,
                      const char* where) {
    if (a.vocab() != b.vocab()) {
        std::ostringstream msg;
        msg << where << ": distributions use different vocabularies";
        throw ContractViolation(msg.str());
    }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty()) {
        throw ContractViolation("Vocabulary: must contain at least one token");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : tokens_) {
        if (!seen.insert(tok).second) {
            throw ContractViolation("Vocabulary: duplicate token '" + tok + "'");
        }
    }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i] == token) return i;
    }
    return std::nullopt;
}

VocabularyPtr make_vocabulary(std::vector<std::string> tokens) {
    return std::make_shared<const Vocabulary>(std::move(tokens));
}

TokenDistribution::TokenDistribution(VocabularyPtr vocab, std::vector<double> probs)
    : vocab_(std::move(vocab)), probs_(std::move(probs)) {
    if (!vocab_) throw ContractViolation("TokenDistribution: null vocabulary");
    if (probs_.size() != vocab_->size()) {
        throw ContractViolation("TokenDistribution: probability vector length " +
                                std::to_string(probs_.size()) + " != vocabulary size " +
                                std::to_string(vocab_->size()));
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) {  // also rejects NaN
            throw ContractViolation("TokenDistribution: negative probability " +
                                    std::to_string(p));
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kMassTolerance) {
        throw ContractViolation("TokenDistribution: mass " + std::to_string(sum) +
                                " is not 1 within 1e-9");
    }
}

void AttributePriorSet::validate() const {
    if (priors.empty()) {
        throw ContractViolation("AttributePriorSet: empty prior set");
    }
    if (priors.size() != lambdas.size()) {
        throw ContractViolation("AttributePriorSet: " + std::to_string(priors.size()) +
                                " priors but " + std::to_string(lambdas.size()) + " lambdas");
    }
    bool any_positive = false;
    for (double l : lambdas) {
        if (!(l >= 0.0)) {
            throw ContractViolation("AttributePriorSet: negative lambda " + std::to_string(l));
        }
        if (l > 0.0) any_positive = true;
    }
    if (!any_positive) {
        throw ContractViolation("AttributePriorSet: at least one lambda must be positive");
    }
    for (std::size_t i = 1; i < priors.size(); ++i) {
        check_same_vocab(priors[0], priors[i], "AttributePriorSet");
    }
}

double AttributePriorSet::total_lambda() const {
    double sum = 0.0;
    for (double l : lambdas) sum += l;
    return sum;
}

TokenDistribution smoothed(const TokenDistribution& dist, double epsilon) {
    std::vector<double> probs(dist.probs().begin(), dist.probs().end());
    double sum = 0.0;
    for (double& p : probs) {
        p += epsilon;
        sum += p;
    }
    for (double& p : probs) p /= sum;
    return TokenDistribution(dist.vocab(), std::move(probs));
}

double kl_divergence(const TokenDistribution& p, const TokenDistribution& q) {
    check_same_vocab(p, q, "kl_divergence");
    const TokenDistribution qs = smoothed(q);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.prob(i);
        if (pi == 0.0) continue;
        sum += pi * std::log(pi / qs.prob(i));
    }
    return sum;
}

double weighted_kl_objective(const TokenDistribution& p, const AttributePriorSet& priors) {
    priors.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < priors.priors.size(); ++i) {
        if (priors.lambdas[i] == 0.0) continue;
        sum += priors.lambdas[i] * kl_divergence(p, priors.priors[i]);
    }
    return sum;
}

TokenDistribution fuse_distributions(const AttributePriorSet& priors) {
    priors.validate();
    const double lambda_total = priors.total_lambda();
    const std::size_t vocab_size = priors.priors.front().size();

    double min_prior_mass = std::numeric_limits<double>::infinity();
    std::vector<double> log_weights(vocab_size, 0.0);
    for (std::size_t i = 0; i < priors.priors.size(); ++i) {
        const double weight = priors.lambdas[i] / lambda_total;
        if (weight == 0.0) continue;
        const TokenDistribution qs = smoothed(priors.priors[i]);
        for (std::size_t x = 0; x < vocab_size; ++x) {
            const double q = qs.prob(x);
            min_prior_mass = std::min(min_prior_mass, q);
            log_weights[x] += weight * std::log(q);
        }
    }

    const double max_log = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> fused(vocab_size, 0.0);
    double norm = 0.0;
    for (std::size_t x = 0; x < vocab_size; ++x) {
        fused[x] = std::exp(log_weights[x] - max_log);
        norm += fused[x];
    }
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        std::ostringstream msg;
        msg << "fuse_distributions: fused weights degenerate (vocabulary size " << vocab_size
            << ", min smoothed prior mass " << min_prior_mass << ")";
        throw DegenerateFusionError(msg.str());
    }
    for (double& f : fused) f /= norm;
    return TokenDistribution(priors.priors.front().vocab(), std::move(fused));
}

std::size_t sample_token(const TokenDistribution& dist, RngState& rng) {
    const double u = rng.next_uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        cumulative += dist.prob(i);
        if (u < cumulative) return i;
    }
    // Rounding can leave cumulative slightly below 1; the last token with
    // positive mass wins.
    for (std::size_t i = dist.size(); i-- > 0;) {
        if (dist.prob(i) > 0.0) return i;
    }
    return dist.size() - 1;
}

std::vector<std::size_t> generate_sequence(
    std::span<const ConditionalPriorProvider* const> providers,
    std::span<const double> lambdas,
    std::vector<std::size_t> context,
    std::size_t length,
    RngState& rng) {
    if (providers.empty()) {
        throw ContractViolation("generate_sequence: no prior providers");
    }
    if (providers.size() != lambdas.size()) {
        throw ContractViolation("generate_sequence: provider/lambda count mismatch");
    }
    const VocabularyPtr& vocab = providers.front()->vocab();
    for (std::size_t step = 0; step < length; ++step) {
        AttributePriorSet set;
        set.lambdas.assign(lambdas.begin(), lambdas.end());
        set.priors.reserve(providers.size());
        for (const auto* provider : providers) {
            TokenDistribution prior = provider->prior(context);
            if (prior.vocab() != vocab) {
                throw ContractViolation(
                    "generate_sequence: provider returned distribution on a different vocabulary");
            }
            set.priors.push_back(std::move(prior));
        }
        const TokenDistribution fused = fuse_distributions(set);
        context.push_back(sample_token(fused, rng));
    }
    return context;
}

}  // namespace c3tg
