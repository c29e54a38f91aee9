// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "c3tg/errors.hpp"

namespace c3tg {

NGramModel::NGramModel(VocabularyPtr vocab, int order, double k)
    : vocab_(std::move(vocab)), order_(order), k_(k) {
    if (!vocab_) throw ConfigurationError("NGramModel: null vocabulary");
    if (order_ < 1) throw ConfigurationError("NGramModel: order must be >= 1");
    if (!(k_ > 0.0)) throw ConfigurationError("NGramModel: smoothing k must be > 0");
    bos_id_ = vocab_->size();
}

NGramModel NGramModel::train_from_sentences(
    const std::vector<std::vector<std::string>>& sentences, int order, double k) {
    std::set<std::string> unique;
    for (const auto& sentence : sentences) {
        unique.insert(sentence.begin(), sentence.end());
    }
    unique.insert("<unk>");
    NGramModel model(make_vocabulary({unique.begin(), unique.end()}), order, k);
    for (const auto& sentence : sentences) {
        std::vector<std::string> toks(sentence.begin(), sentence.end());
        model.add_sentence(toks);
    }
    return model;
}

std::size_t NGramModel::token_id(const std::string& token) const {
    if (auto idx = vocab_->index_of(token)) return *idx;
    if (auto unk = vocab_->index_of("<unk>")) return *unk;
    throw ContractViolation("NGramModel: token '" + token +
                            "' not in vocabulary and no <unk> entry");
}

std::vector<std::size_t> NGramModel::ids_for(std::span<const std::string> tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) ids.push_back(token_id(tok));
    return ids;
}

void NGramModel::add_sentence(std::span<const std::string> tokens) {
    add_sentence_ids(ids_for(tokens));
}

void NGramModel::add_sentence_ids(std::span<const std::size_t> ids) {
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        if (ids[pos] >= vocab_->size()) {
            throw ContractViolation("NGramModel: token id out of range");
        }
        ContextKey key = context_key(ids.subspan(0, pos));
        Counts& counts = counts_[key];
        counts.per_token[ids[pos]] += 1;
        counts.total += 1;
    }
}

NGramModel::ContextKey NGramModel::context_key(std::span<const std::size_t> context) const {
    const std::size_t need = static_cast<std::size_t>(order_ - 1);
    ContextKey key(need, bos_id_);
    const std::size_t have = std::min(need, context.size());
    for (std::size_t i = 0; i < have; ++i) {
        key[need - 1 - i] = context[context.size() - 1 - i];
    }
    return key;
}

double NGramModel::token_prob(std::span<const std::size_t> context, std::size_t token) const {
    if (token >= vocab_->size()) {
        throw ContractViolation("NGramModel: token id out of range");
    }
    const double vocab_size = static_cast<double>(vocab_->size());
    const auto it = counts_.find(context_key(context));
    double count = 0.0;
    double total = 0.0;
    if (it != counts_.end()) {
        total = static_cast<double>(it->second.total);
        const auto tok_it = it->second.per_token.find(token);
        if (tok_it != it->second.per_token.end()) {
            count = static_cast<double>(tok_it->second);
        }
    }
    return (count + k_) / (total + k_ * vocab_size);
}

TokenDistribution NGramModel::next_distribution(std::span<const std::size_t> context) const {
    std::vector<double> probs(vocab_->size(), 0.0);
    for (std::size_t tok = 0; tok < vocab_->size(); ++tok) {
        probs[tok] = token_prob(context, tok);
    }
    return TokenDistribution(vocab_, std::move(probs));
}

double NGramModel::sequence_logprob(std::span<const std::size_t> ids) const {
    double logprob = 0.0;
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        logprob += std::log(token_prob(ids.subspan(0, pos), ids[pos]));
    }
    return logprob;
}

BigramPriorProvider::BigramPriorProvider(
    VocabularyPtr vocab, const std::vector<std::vector<std::string>>& corpus_sentences,
    double k, double interpolation)
    : vocab_(std::move(vocab)),
      bigram_(vocab_, 2, k),
      unigram_(vocab_, 1, k),
      interpolation_(interpolation) {
    if (!(interpolation_ >= 0.0 && interpolation_ <= 1.0)) {
        throw ConfigurationError("BigramPriorProvider: interpolation must be in [0,1]");
    }
    for (const auto& sentence : corpus_sentences) {
        std::vector<std::size_t> ids;
        ids.reserve(sentence.size());
        for (const auto& tok : sentence) {
            auto idx = vocab_->index_of(tok);
            if (!idx) {
                throw ConfigurationError("BigramPriorProvider: corpus token '" + tok +
                                         "' missing from the shared vocabulary");
            }
            ids.push_back(*idx);
        }
        bigram_.add_sentence_ids(ids);
        unigram_.add_sentence_ids(ids);
    }
}

TokenDistribution BigramPriorProvider::prior(std::span<const std::size_t> context) const {
    std::vector<double> probs(vocab_->size(), 0.0);
    for (std::size_t tok = 0; tok < vocab_->size(); ++tok) {
        probs[tok] = interpolation_ * bigram_.token_prob(context, tok) +
                     (1.0 - interpolation_) * unigram_.token_prob(context, tok);
    }
    return TokenDistribution(vocab_, std::move(probs));
}

}  // namespace c3tg
