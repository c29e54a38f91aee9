// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace c3tg {

enum class AttributeRole { primary_optimization, stability_constrained, inactive };

const char* to_string(AttributeRole role);
AttributeRole attribute_role_from_string(const std::string& name);

/// One control dimension: target intensity T, energy weight alpha and
/// generation weight lambda.
struct AttributeSpec {
    std::string id;
    double target = 0.5;
    double alpha = 1.0;
    double lambda = 1.0;
    AttributeRole role = AttributeRole::primary_optimization;

    void validate() const;
};

/// Per-dimension classifier outputs for one text. Keys are attribute ids;
/// the hash ties the scores to the exact scored bytes.
struct ScoreVector {
    std::map<std::string, double> scores;
    std::string text_hash;

    bool operator==(const ScoreVector&) const = default;
};

struct ScorerOutput {
    double score = 0.5;            // always in [0,1]
    std::optional<double> logit;   // raw logit when the backend has one
};

/// Attribute intensity estimator. Implementations must be safe for
/// concurrent read-only use.
class AttributeScorer {
public:
    virtual ~AttributeScorer() = default;
    virtual ScorerOutput evaluate(const std::string& text) const = 0;
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// sigmoid(squash_gain * matched-weight mass per token). Zero tokens or
/// zero matches give the 0.5 base rate.
double lexicon_score(const std::string& text, const std::map<std::string, double>& lexicon,
                     double squash_gain);

/// Deterministic lexicon-driven stand-in for a trained classifier.
class LexiconScorer : public AttributeScorer {
public:
    LexiconScorer(std::map<std::string, double> lexicon, double squash_gain = 4.0);

    /// Loads a UTF-8 file with one `term<TAB>weight` line per entry.
    static LexiconScorer from_file(const std::string& path, double squash_gain = 4.0);

    ScorerOutput evaluate(const std::string& text) const override;

    const std::map<std::string, double>& lexicon() const { return lexicon_; }
    double squash_gain() const { return squash_gain_; }

private:
    std::map<std::string, double> lexicon_;
    double squash_gain_;
};

using ScorerPtr = std::shared_ptr<const AttributeScorer>;
using ScorerRegistry = std::map<std::string, ScorerPtr>;

/// Scores `text` on every dimension in the registry.
ScoreVector score_all(const std::string& text, const ScorerRegistry& scorers);

/// Throws ConfigurationError naming the first non-inactive spec without a
/// registered scorer.
void require_scorers(std::span<const AttributeSpec> specs, const ScorerRegistry& scorers);

/// Result of a temperature-scaling fit. ECE values are reported, not
/// asserted: scaling does not guarantee improvement on the fitting set.
struct CalibrationParams {
    double temperature = 1.0;
    std::size_t fitted_on = 0;
    double ece_before = 0.0;
    double ece_after = 0.0;
};

/// Equal-width-binned expected calibration error.
double expected_calibration_error(std::span<const double> probs, std::span<const int> labels,
                                  int bins);

/// Fits T minimizing the NLL of sigmoid(logit / T) by golden-section
/// search on [0.05, 20]. Inputs are canonicalized by sorting, so the fit
/// is exactly invariant to sample order.
CalibrationParams fit_temperature(std::span<const double> logits, std::span<const int> labels,
                                  int ece_bins = 10);

/// Attribute description embedding used for anchor selection.
struct AttributeDescriptor {
    std::string id;
    std::vector<double> embedding;

    void validate() const;
};

/// Id of the stock descriptor with the highest cosine similarity to
/// `new_attr` (embeddings are unit-norm, so the dot product decides).
/// Ties break toward the lexicographically smaller id.
std::string select_anchor(const AttributeDescriptor& new_attr,
                          std::span<const AttributeDescriptor> stock);

}  // namespace c3tg
