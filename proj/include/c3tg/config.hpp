// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "c3tg/backends.hpp"
#include "c3tg/correlation.hpp"
#include "c3tg/optimizer.hpp"

namespace c3tg {

struct ScorersConfig {
    std::string type = "lexicon";
    double squash_gain = 4.0;
    std::map<std::string, std::string> lexicon_paths;  // attribute id -> tsv path
};

struct BackendChoice {
    std::string type = "synthetic";  // synthetic | http | echo
    std::string substitutions_path;  // synthetic: JSON substitution table
    BackendConfig http;
    std::string auth_token_env = "C3TG_AUTH_TOKEN";
    RewriteParams params;
};

struct PenaltySettings {
    double c = kDefaultPenaltyC;
    std::string matrix_path;  // CSV; empty when the matrix is inline
    std::optional<CorrelationMatrix> inline_matrix;
};

struct MetricsConfig {
    std::vector<int> distinct_ns = {1, 2, 3};
    std::string ppl_model_path;  // training corpus; empty -> train on the input text
    int ppl_order = 2;
    double ppl_k = 0.5;
};

struct TemplatePaths {
    std::string core_calibration;
    std::string balancing;
    std::string global_finetune;
    std::string one_shot;
};

/// Complete run configuration. File paths are resolved against the config
/// file's directory at load time, so the echoed config re-executes from
/// any working directory.
struct RunConfig {
    int schema_version = 1;
    std::vector<AttributeSpec> attributes;
    OptimizationConfig optimization;
    PenaltySettings penalty;
    BackendChoice backend;
    ScorersConfig scorers;
    MetricsConfig metrics;
    TemplatePaths templates;

    static RunConfig load_file(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir);
    nlohmann::json to_json() const;

    /// Structural checks: unique ids, valid ranges, referenced files
    /// present, stage plan coverage. Throws ValidationError or
    /// ConfigurationError with the offending item named.
    void validate() const;
};

}  // namespace c3tg
