// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "c3tg/errors.hpp"

namespace c3tg {

ScoreSampleMatrix ScoreSampleMatrix::from_score_vectors(const std::vector<ScoreVector>& vectors) {
    ScoreSampleMatrix out;
    if (vectors.empty()) return out;
    for (const auto& [dim, _] : vectors.front().scores) out.dims.push_back(dim);
    for (const auto& vec : vectors) {
        std::vector<double> row;
        row.reserve(out.dims.size());
        for (const auto& dim : out.dims) {
            const auto it = vec.scores.find(dim);
            if (it == vec.scores.end()) {
                throw ContractViolation("ScoreSampleMatrix: row missing dimension '" + dim + "'");
            }
            row.push_back(it->second);
        }
        if (row.size() != vec.scores.size()) {
            throw ContractViolation("ScoreSampleMatrix: row has extra dimensions");
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

void ScoreSampleMatrix::validate() const {
    if (dims.empty()) throw ContractViolation("ScoreSampleMatrix: no dimensions");
    std::set<std::string> unique(dims.begin(), dims.end());
    if (unique.size() != dims.size()) {
        throw ContractViolation("ScoreSampleMatrix: duplicate dimension ids");
    }
    for (const auto& row : rows) {
        if (row.size() != dims.size()) {
            throw ContractViolation("ScoreSampleMatrix: ragged row");
        }
    }
}

std::size_t CorrelationMatrix::index_of(const std::string& dim) const {
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] == dim) return i;
    }
    throw ContractViolation("CorrelationMatrix: unknown dimension '" + dim + "'");
}

std::vector<double> penalty_c_grid() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

CorrelationMatrix pearson_matrix(const ScoreSampleMatrix& samples) {
    samples.validate();
    const std::size_t n = samples.rows.size();
    if (n < 3) {
        throw InsufficientDataError("pearson_matrix: need at least 3 rows, got " +
                                    std::to_string(n));
    }
    const std::size_t d = samples.dims.size();

    std::vector<double> mean(d, 0.0);
    for (const auto& row : samples.rows) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    // Centered columns and their sum of squares.
    std::vector<std::vector<double>> centered(d, std::vector<double>(n, 0.0));
    std::vector<double> sumsq(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = samples.rows[i][j] - mean[j];
            centered[j][i] = v;
            sumsq[j] += v * v;
        }
    }

    // A column is degenerate when its squared deviations vanish up to the
    // rounding floor of centering.
    const double degenerate_threshold = 1e-20 * static_cast<double>(n);
    std::vector<bool> degenerate(d, false);
    CorrelationMatrix out;
    out.dims = samples.dims;
    for (std::size_t j = 0; j < d; ++j) {
        if (sumsq[j] <= degenerate_threshold) {
            degenerate[j] = true;
            out.degenerate_dims.push_back(samples.dims[j]);
        }
    }

    out.rho.assign(d, std::vector<double>(d, 0.0));
    for (std::size_t a = 0; a < d; ++a) {
        out.rho[a][a] = 1.0;
        for (std::size_t b = a + 1; b < d; ++b) {
            double value = 0.0;
            if (!degenerate[a] && !degenerate[b]) {
                double cov = 0.0;
                for (std::size_t i = 0; i < n; ++i) cov += centered[a][i] * centered[b][i];
                value = cov / std::sqrt(sumsq[a] * sumsq[b]);
                value = std::clamp(value, -1.0, 1.0);
            }
            out.rho[a][b] = value;
            out.rho[b][a] = value;
        }
    }
    return out;
}

PenaltyConfig derive_betas(const CorrelationMatrix& matrix, const std::string& target_dim,
                           double c) {
    return derive_betas_multi(matrix, std::span<const std::string>(&target_dim, 1), c);
}

PenaltyConfig derive_betas_multi(const CorrelationMatrix& matrix,
                                 std::span<const std::string> primary_dims, double c) {
    if (!(c > 0.0)) throw ContractViolation("derive_betas: c must be > 0");
    if (primary_dims.empty()) throw ContractViolation("derive_betas: no primary dims");

    std::set<std::string> primaries(primary_dims.begin(), primary_dims.end());
    std::vector<std::size_t> primary_idx;
    primary_idx.reserve(primaries.size());
    for (const auto& dim : primaries) primary_idx.push_back(matrix.index_of(dim));

    PenaltyConfig out;
    out.c = c;
    out.target_dim = primaries.size() == 1 ? *primaries.begin() : std::string("multi");

    // Per-primary normalizer: the largest off-diagonal |rho| in that row.
    // The diagonal is excluded so the strongest coupled dimension lands at
    // beta = c exactly.
    std::vector<double> row_max(primary_idx.size(), 0.0);
    for (std::size_t p = 0; p < primary_idx.size(); ++p) {
        const std::size_t i = primary_idx[p];
        for (std::size_t u = 0; u < matrix.dims.size(); ++u) {
            if (u == i) continue;
            row_max[p] = std::max(row_max[p], std::abs(matrix.rho[i][u]));
        }
    }

    bool any_signal = false;
    for (double m : row_max) {
        if (m > 0.0) any_signal = true;
    }

    for (std::size_t j = 0; j < matrix.dims.size(); ++j) {
        if (primaries.count(matrix.dims[j])) continue;
        if (!any_signal) {
            out.betas[matrix.dims[j]] = c / 2.0;
            continue;
        }
        double beta = 0.0;
        for (std::size_t p = 0; p < primary_idx.size(); ++p) {
            if (row_max[p] == 0.0) continue;
            beta = std::max(beta, c * std::abs(matrix.rho[primary_idx[p]][j]) / row_max[p]);
        }
        out.betas[matrix.dims[j]] = beta;
    }
    out.uniform_fallback = !any_signal;
    return out;
}

}  // namespace c3tg
