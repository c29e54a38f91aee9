// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "c3tg/fusion.hpp"

namespace c3tg {

/// Add-k smoothed n-gram model over a fixed vocabulary. Contexts are padded
/// with a begin-of-sequence marker, so every token position conditions on
/// exactly order-1 predecessors. Out-of-vocabulary query tokens map to the
/// reserved "<unk>" entry when present, otherwise they are an error.
class NGramModel {
public:
    NGramModel(VocabularyPtr vocab, int order, double k);

    /// Builds vocabulary from the corpus plus "<unk>" and trains in one go.
    static NGramModel train_from_sentences(const std::vector<std::vector<std::string>>& sentences,
                                           int order, double k);

    void add_sentence(std::span<const std::string> tokens);
    void add_sentence_ids(std::span<const std::size_t> ids);

    const VocabularyPtr& vocab() const { return vocab_; }
    int order() const { return order_; }
    double k() const { return k_; }

    /// P(token | context) with add-k smoothing. `context` holds the full
    /// preceding sequence; only the last order-1 entries matter.
    double token_prob(std::span<const std::size_t> context, std::size_t token) const;

    /// Distribution over the whole vocabulary for the given context.
    TokenDistribution next_distribution(std::span<const std::size_t> context) const;

    /// Sum of log P(token | predecessors) over the sequence, BOS-padded.
    double sequence_logprob(std::span<const std::size_t> ids) const;

    /// Maps a token string to its id, falling back to "<unk>".
    std::size_t token_id(const std::string& token) const;

    std::vector<std::size_t> ids_for(std::span<const std::string> tokens) const;

private:
    using ContextKey = std::vector<std::size_t>;

    ContextKey context_key(std::span<const std::size_t> context) const;

    VocabularyPtr vocab_;
    int order_;
    double k_;
    std::size_t bos_id_;  // vocab_->size(), a virtual padding id
    struct Counts {
        std::map<std::size_t, std::uint64_t> per_token;
        std::uint64_t total = 0;
    };
    std::map<ContextKey, Counts> counts_;
};

/// Interpolated add-k bigram prior provider: the desk-scale stand-in for an
/// attribute-conditioned language model. P(w|prev) mixes the bigram and
/// unigram add-k estimates with weight `interpolation` on the bigram.
class BigramPriorProvider : public ConditionalPriorProvider {
public:
    BigramPriorProvider(VocabularyPtr vocab,
                        const std::vector<std::vector<std::string>>& corpus_sentences,
                        double k = 0.5, double interpolation = 0.7);

    TokenDistribution prior(std::span<const std::size_t> context) const override;
    const VocabularyPtr& vocab() const override { return vocab_; }

private:
    VocabularyPtr vocab_;
    NGramModel bigram_;
    NGramModel unigram_;
    double interpolation_;
};

}  // namespace c3tg
