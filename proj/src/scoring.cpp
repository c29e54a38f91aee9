// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "c3tg/errors.hpp"
#include "c3tg/text.hpp"

namespace c3tg {

const char* to_string(AttributeRole role) {
    switch (role) {
        case AttributeRole::primary_optimization: return "primary_optimization";
        case AttributeRole::stability_constrained: return "stability_constrained";
        case AttributeRole::inactive: return "inactive";
    }
    return "unknown";
}

AttributeRole attribute_role_from_string(const std::string& name) {
    if (name == "primary_optimization") return AttributeRole::primary_optimization;
    if (name == "stability_constrained") return AttributeRole::stability_constrained;
    if (name == "inactive") return AttributeRole::inactive;
    throw ValidationError("unknown attribute role '" + name + "'");
}

void AttributeSpec::validate() const {
    if (id.empty()) throw ValidationError("AttributeSpec: empty id");
    if (!(target >= 0.0 && target <= 1.0)) {
        throw ValidationError("AttributeSpec '" + id + "': target " + std::to_string(target) +
                              " outside [0,1]");
    }
    if (!(alpha >= 0.0)) {
        throw ValidationError("AttributeSpec '" + id + "': alpha must be >= 0");
    }
    if (!(lambda >= 0.0)) {
        throw ValidationError("AttributeSpec '" + id + "': lambda must be >= 0");
    }
}

double lexicon_score(const std::string& text, const std::map<std::string, double>& lexicon,
                     double squash_gain) {
    if (lexicon.empty()) {
        throw ConfigurationError("lexicon_score: empty lexicon");
    }
    if (!(squash_gain > 0.0)) {
        throw ConfigurationError("lexicon_score: squash_gain must be > 0");
    }
    const std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) return sigmoid(0.0);
    double matched = 0.0;
    for (const auto& tok : tokens) {
        const auto it = lexicon.find(tok);
        if (it != lexicon.end()) matched += it->second;
    }
    return sigmoid(squash_gain * matched / static_cast<double>(tokens.size()));
}

LexiconScorer::LexiconScorer(std::map<std::string, double> lexicon, double squash_gain)
    : lexicon_(std::move(lexicon)), squash_gain_(squash_gain) {
    if (lexicon_.empty()) throw ConfigurationError("LexiconScorer: empty lexicon");
    if (!(squash_gain_ > 0.0)) throw ConfigurationError("LexiconScorer: squash_gain must be > 0");
}

LexiconScorer LexiconScorer::from_file(const std::string& path, double squash_gain) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("LexiconScorer: cannot open '" + path + "'");
    std::map<std::string, double> lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ConfigurationError("LexiconScorer: '" + path + "' line " +
                                     std::to_string(line_no) + ": expected term<TAB>weight");
        }
        const std::string term = line.substr(0, tab);
        try {
            lexicon[term] = std::stod(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ConfigurationError("LexiconScorer: '" + path + "' line " +
                                     std::to_string(line_no) + ": bad weight");
        }
    }
    return LexiconScorer(std::move(lexicon), squash_gain);
}

ScorerOutput LexiconScorer::evaluate(const std::string& text) const {
    const std::vector<std::string> tokens = tokenize(text);
    double ratio = 0.0;
    if (!tokens.empty()) {
        double matched = 0.0;
        for (const auto& tok : tokens) {
            const auto it = lexicon_.find(tok);
            if (it != lexicon_.end()) matched += it->second;
        }
        ratio = matched / static_cast<double>(tokens.size());
    }
    const double logit = squash_gain_ * ratio;
    return ScorerOutput{sigmoid(logit), logit};
}

ScoreVector score_all(const std::string& text, const ScorerRegistry& scorers) {
    ScoreVector out;
    out.text_hash = fnv1a_hex(text);
    for (const auto& [id, scorer] : scorers) {
        if (!scorer) throw ConfigurationError("score_all: null scorer for attribute '" + id + "'");
        const double score = scorer->evaluate(text).score;
        if (!(score >= 0.0 && score <= 1.0)) {
            throw ContractViolation("score_all: scorer for '" + id + "' returned " +
                                    std::to_string(score) + " outside [0,1]");
        }
        out.scores.emplace(id, score);
    }
    return out;
}

void require_scorers(std::span<const AttributeSpec> specs, const ScorerRegistry& scorers) {
    for (const auto& spec : specs) {
        if (spec.role == AttributeRole::inactive) continue;
        if (scorers.find(spec.id) == scorers.end()) {
            throw ConfigurationError("no scorer registered for attribute '" + spec.id + "'");
        }
    }
}

double expected_calibration_error(std::span<const double> probs, std::span<const int> labels,
                                  int bins) {
    if (probs.size() != labels.size()) {
        throw ContractViolation("expected_calibration_error: " + std::to_string(probs.size()) +
                                " probs vs " + std::to_string(labels.size()) + " labels");
    }
    if (bins < 1) throw ContractViolation("expected_calibration_error: bins must be >= 1");
    if (probs.empty()) throw ContractViolation("expected_calibration_error: empty input");

    std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> acc_sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ContractViolation("expected_calibration_error: prob " + std::to_string(p) +
                                    " outside [0,1]");
        }
        auto bin = static_cast<std::size_t>(p * bins);
        if (bin >= static_cast<std::size_t>(bins)) bin = static_cast<std::size_t>(bins) - 1;
        conf_sum[bin] += p;
        acc_sum[bin] += (labels[i] != 0) ? 1.0 : 0.0;
        count[bin] += 1;
    }
    const double n = static_cast<double>(probs.size());
    double ece = 0.0;
    for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b) {
        if (count[b] == 0) continue;
        const double nb = static_cast<double>(count[b]);
        ece += (nb / n) * std::abs(acc_sum[b] / nb - conf_sum[b] / nb);
    }
    return ece;
}

namespace {

double scaled_nll(std::span<const double> logits, std::span<const int> labels, double temperature) {
    double nll = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i] / temperature;
        // -log sigmoid(z) = log(1 + exp(-z)), computed stably
        const double log_sig = (z >= 0.0) ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
        const double log_one_minus = log_sig - z;  // log(1-sigmoid(z)) = log_sig - z
        nll -= (labels[i] != 0) ? log_sig : log_one_minus;
    }
    return nll;
}

}  // namespace

CalibrationParams fit_temperature(std::span<const double> logits, std::span<const int> labels,
                                  int ece_bins) {
    if (logits.size() != labels.size()) {
        throw ContractViolation("fit_temperature: " + std::to_string(logits.size()) +
                                " logits vs " + std::to_string(labels.size()) + " labels");
    }
    if (logits.size() < 10) {
        throw ContractViolation("fit_temperature: need at least 10 samples, got " +
                                std::to_string(logits.size()));
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int label : labels) {
        (label != 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw IllPosedError("fit_temperature: labels contain a single class");
    }

    // Canonical sample order makes the fit exactly permutation-invariant.
    std::vector<std::size_t> idx(logits.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (logits[a] != logits[b]) return logits[a] < logits[b];
        return labels[a] < labels[b];
    });
    std::vector<double> sorted_logits(logits.size());
    std::vector<int> sorted_labels(labels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        sorted_logits[i] = logits[idx[i]];
        sorted_labels[i] = labels[idx[i]];
    }

    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.05;
    double hi = 20.0;
    double x1 = hi - golden * (hi - lo);
    double x2 = lo + golden * (hi - lo);
    double f1 = scaled_nll(sorted_logits, sorted_labels, x1);
    double f2 = scaled_nll(sorted_logits, sorted_labels, x2);
    while (hi - lo > 1e-12) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = scaled_nll(sorted_logits, sorted_labels, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = scaled_nll(sorted_logits, sorted_labels, x2);
        }
    }
    const double temperature = 0.5 * (lo + hi);

    std::vector<double> probs_before(sorted_logits.size());
    std::vector<double> probs_after(sorted_logits.size());
    for (std::size_t i = 0; i < sorted_logits.size(); ++i) {
        probs_before[i] = sigmoid(sorted_logits[i]);
        probs_after[i] = sigmoid(sorted_logits[i] / temperature);
    }

    CalibrationParams params;
    params.temperature = temperature;
    params.fitted_on = logits.size();
    params.ece_before = expected_calibration_error(probs_before, sorted_labels, ece_bins);
    params.ece_after = expected_calibration_error(probs_after, sorted_labels, ece_bins);
    return params;
}

void AttributeDescriptor::validate() const {
    if (id.empty()) throw ValidationError("AttributeDescriptor: empty id");
    if (embedding.empty()) throw ValidationError("AttributeDescriptor '" + id + "': empty embedding");
    double norm_sq = 0.0;
    for (double v : embedding) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    if (std::abs(norm - 1.0) > 1e-6) {
        throw ValidationError("AttributeDescriptor '" + id + "': embedding norm " +
                              std::to_string(norm) + " is not 1 within 1e-6");
    }
}

std::string select_anchor(const AttributeDescriptor& new_attr,
                          std::span<const AttributeDescriptor> stock) {
    if (stock.empty()) throw ConfigurationError("select_anchor: empty stock");
    new_attr.validate();
    const std::string* best_id = nullptr;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (const auto& candidate : stock) {
        candidate.validate();
        if (candidate.embedding.size() != new_attr.embedding.size()) {
            throw ContractViolation("select_anchor: embedding dimension mismatch for '" +
                                    candidate.id + "'");
        }
        double dot = 0.0;
        for (std::size_t i = 0; i < candidate.embedding.size(); ++i) {
            dot += candidate.embedding[i] * new_attr.embedding[i];
        }
        if (best_id == nullptr || dot > best_dot ||
            (dot == best_dot && candidate.id < *best_id)) {
            best_id = &candidate.id;
            best_dot = dot;
        }
    }
    return *best_id;
}

}  // namespace c3tg
