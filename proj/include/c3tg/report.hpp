// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "c3tg/metrics.hpp"
#include "c3tg/optimizer.hpp"

namespace c3tg {

/// Full record of one optimization run. Serializes to JSON with sorted
/// keys and shortest-round-trip numbers, so identical runs produce
/// byte-identical files and parsing is lossless.
struct RunReport {
    int schema_version = 1;
    RunStatus status = RunStatus::exhausted;
    std::string initial_text;
    std::string final_text;
    double final_energy = 0.0;
    std::vector<EnergyBreakdown> energy_trajectory;
    std::vector<PromptLogEntry> prompts;
    std::vector<AttemptLogEntry> attempts;
    std::vector<IterationRecord> per_iteration;
    ScoreVector final_scores;
    std::optional<MetricReport> metrics;
    std::vector<int> stalled_stages;
    int accepted_iterations = 0;
    int total_attempts = 0;
    std::uint64_t seed = 0;
    nlohmann::json config_echo;  // resolved config for exact re-execution
};

// JSON bindings (nlohmann ADL).
void to_json(nlohmann::json& j, const ScoreVector& v);
void from_json(const nlohmann::json& j, ScoreVector& v);
void to_json(nlohmann::json& j, const EnergyBreakdown& b);
void from_json(const nlohmann::json& j, EnergyBreakdown& b);
void to_json(nlohmann::json& j, const RewriteDirective& d);
void from_json(const nlohmann::json& j, RewriteDirective& d);
void to_json(nlohmann::json& j, const PromptLogEntry& p);
void from_json(const nlohmann::json& j, PromptLogEntry& p);
void to_json(nlohmann::json& j, const AttemptLogEntry& a);
void from_json(const nlohmann::json& j, AttemptLogEntry& a);
void to_json(nlohmann::json& j, const IterationRecord& r);
void from_json(const nlohmann::json& j, IterationRecord& r);
void to_json(nlohmann::json& j, const MetricReport& m);
void from_json(const nlohmann::json& j, MetricReport& m);
void to_json(nlohmann::json& j, const CalibrationParams& p);
void from_json(const nlohmann::json& j, CalibrationParams& p);
void to_json(nlohmann::json& j, const PenaltyConfig& p);
void from_json(const nlohmann::json& j, PenaltyConfig& p);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

std::string serialize_report(const RunReport& report);
RunReport parse_report(const std::string& text);

}  // namespace c3tg
