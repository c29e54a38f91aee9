// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "c3tg/scoring.hpp"

namespace c3tg {

/// Classifier scores for a corpus: one row per text, one column per
/// attribute dimension.
struct ScoreSampleMatrix {
    std::vector<std::string> dims;
    std::vector<std::vector<double>> rows;  // rows[i][d] aligned with dims

    static ScoreSampleMatrix from_score_vectors(const std::vector<ScoreVector>& vectors);
    void validate() const;
};

/// Symmetric pairwise Pearson correlation matrix. Columns with zero
/// variance are listed in `degenerate_dims`; their off-diagonal entries
/// are defined as 0 so downstream penalty derivation stays total.
struct CorrelationMatrix {
    std::vector<std::string> dims;
    std::vector<std::vector<double>> rho;
    std::vector<std::string> degenerate_dims;

    std::size_t index_of(const std::string& dim) const;  // throws if absent
};

/// Stability-penalty coefficients for one (or a set of) primary dims.
struct PenaltyConfig {
    double c = 0.3;                       // global strength factor
    std::map<std::string, double> betas;  // excludes the primary dim(s)
    std::string target_dim;               // primary dim ("multi" for joint)
    bool uniform_fallback = false;        // true when the target row had no signal
};

/// Default global penalty factor.
inline constexpr double kDefaultPenaltyC = 0.3;

/// Grid of c values swept by the penalty-strength search harness.
std::vector<double> penalty_c_grid();

CorrelationMatrix pearson_matrix(const ScoreSampleMatrix& samples);

/// beta_j = c * |rho_ij| / max_{u != i} |rho_iu| for every j != i. When the
/// target row has no off-diagonal signal the result falls back to a uniform
/// c/2 and sets `uniform_fallback`.
PenaltyConfig derive_betas(const CorrelationMatrix& matrix, const std::string& target_dim,
                           double c);

/// Joint form for iterations optimizing several dims at once: each
/// constrained dim takes the strongest normalized coupling over the
/// primaries.
PenaltyConfig derive_betas_multi(const CorrelationMatrix& matrix,
                                 std::span<const std::string> primary_dims, double c);

}  // namespace c3tg
