// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/report.hpp"

#include "c3tg/errors.hpp"

namespace c3tg {

namespace {

const char* direction_name(AdjustDirection d) { return to_string(d); }

AdjustDirection direction_from(const std::string& name) {
    if (name == "increase") return AdjustDirection::increase;
    if (name == "decrease") return AdjustDirection::decrease;
    if (name == "maintain") return AdjustDirection::maintain;
    throw ValidationError("unknown directive direction '" + name + "'");
}

AdjustIntensity intensity_from(const std::string& name) {
    if (name == "slightly") return AdjustIntensity::slight;
    if (name == "significantly") return AdjustIntensity::significant;
    throw ValidationError("unknown directive intensity '" + name + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const ScoreVector& v) {
    j = nlohmann::json{{"scores", v.scores}, {"text_hash", v.text_hash}};
}

void from_json(const nlohmann::json& j, ScoreVector& v) {
    j.at("scores").get_to(v.scores);
    j.at("text_hash").get_to(v.text_hash);
}

void to_json(nlohmann::json& j, const EnergyBreakdown& b) {
    j = nlohmann::json{{"classify_term", b.classify_term},
                       {"overlap_term", b.overlap_term},
                       {"total", b.total},
                       {"deviations", b.deviations},
                       {"shifts", b.shifts}};
}

void from_json(const nlohmann::json& j, EnergyBreakdown& b) {
    j.at("classify_term").get_to(b.classify_term);
    j.at("overlap_term").get_to(b.overlap_term);
    j.at("total").get_to(b.total);
    j.at("deviations").get_to(b.deviations);
    j.at("shifts").get_to(b.shifts);
}

void to_json(nlohmann::json& j, const RewriteDirective& d) {
    j = nlohmann::json{{"dim", d.dim}, {"direction", direction_name(d.direction)}};
    if (d.intensity.has_value()) j["intensity"] = to_string(*d.intensity);
}

void from_json(const nlohmann::json& j, RewriteDirective& d) {
    d.dim = j.at("dim").get<std::string>();
    d.direction = direction_from(j.at("direction").get<std::string>());
    if (j.contains("intensity")) {
        d.intensity = intensity_from(j.at("intensity").get<std::string>());
    } else {
        d.intensity.reset();
    }
}

void to_json(nlohmann::json& j, const PromptLogEntry& p) {
    j = nlohmann::json{{"stage_index", p.stage_index},
                       {"stage", to_string(p.stage)},
                       {"iteration", p.iteration},
                       {"directives", p.directives},
                       {"rendered", p.rendered}};
}

void from_json(const nlohmann::json& j, PromptLogEntry& p) {
    j.at("stage_index").get_to(p.stage_index);
    p.stage = optimization_stage_from_string(j.at("stage").get<std::string>());
    j.at("iteration").get_to(p.iteration);
    j.at("directives").get_to(p.directives);
    j.at("rendered").get_to(p.rendered);
}

void to_json(nlohmann::json& j, const AttemptLogEntry& a) {
    j = nlohmann::json{{"stage_index", a.stage_index}, {"iteration", a.iteration},
                       {"attempt", a.attempt},         {"candidate_hash", a.candidate_hash},
                       {"candidate_energy", a.candidate_energy},
                       {"accepted", a.accepted},       {"cause", a.cause}};
}

void from_json(const nlohmann::json& j, AttemptLogEntry& a) {
    j.at("stage_index").get_to(a.stage_index);
    j.at("iteration").get_to(a.iteration);
    j.at("attempt").get_to(a.attempt);
    j.at("candidate_hash").get_to(a.candidate_hash);
    j.at("candidate_energy").get_to(a.candidate_energy);
    j.at("accepted").get_to(a.accepted);
    j.at("cause").get_to(a.cause);
}

void to_json(nlohmann::json& j, const IterationRecord& r) {
    j = nlohmann::json{{"index", r.index},
                       {"text_hash", r.text_hash},
                       {"scores", r.scores},
                       {"breakdown", r.breakdown}};
}

void from_json(const nlohmann::json& j, IterationRecord& r) {
    j.at("index").get_to(r.index);
    j.at("text_hash").get_to(r.text_hash);
    j.at("scores").get_to(r.scores);
    j.at("breakdown").get_to(r.breakdown);
}

void to_json(nlohmann::json& j, const MetricReport& m) {
    nlohmann::json distinct = nlohmann::json::object();
    for (const auto& [n, value] : m.distinct) distinct[std::to_string(n)] = value;
    j = nlohmann::json{{"distinct", distinct},
                       {"ppl_proxy", m.ppl_proxy},
                       {"drift", m.drift},
                       {"avg_abs_bias", m.avg_abs_bias}};
}

void from_json(const nlohmann::json& j, MetricReport& m) {
    m.distinct.clear();
    for (const auto& [key, value] : j.at("distinct").items()) {
        m.distinct[std::stoi(key)] = value.get<double>();
    }
    j.at("ppl_proxy").get_to(m.ppl_proxy);
    j.at("drift").get_to(m.drift);
    j.at("avg_abs_bias").get_to(m.avg_abs_bias);
}

void to_json(nlohmann::json& j, const CalibrationParams& p) {
    j = nlohmann::json{{"temperature", p.temperature},
                       {"fitted_on", p.fitted_on},
                       {"ece_before", p.ece_before},
                       {"ece_after", p.ece_after}};
}

void from_json(const nlohmann::json& j, CalibrationParams& p) {
    j.at("temperature").get_to(p.temperature);
    j.at("fitted_on").get_to(p.fitted_on);
    j.at("ece_before").get_to(p.ece_before);
    j.at("ece_after").get_to(p.ece_after);
}

void to_json(nlohmann::json& j, const PenaltyConfig& p) {
    j = nlohmann::json{{"c", p.c},
                       {"betas", p.betas},
                       {"target_dim", p.target_dim},
                       {"uniform_fallback", p.uniform_fallback}};
}

void from_json(const nlohmann::json& j, PenaltyConfig& p) {
    j.at("c").get_to(p.c);
    j.at("betas").get_to(p.betas);
    j.at("target_dim").get_to(p.target_dim);
    j.at("uniform_fallback").get_to(p.uniform_fallback);
}

void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{{"schema_version", r.schema_version},
                       {"status", to_string(r.status)},
                       {"initial_text", r.initial_text},
                       {"final_text", r.final_text},
                       {"final_energy", r.final_energy},
                       {"energy_trajectory", r.energy_trajectory},
                       {"prompts", r.prompts},
                       {"attempts", r.attempts},
                       {"per_iteration", r.per_iteration},
                       {"final_scores", r.final_scores},
                       {"stalled_stages", r.stalled_stages},
                       {"accepted_iterations", r.accepted_iterations},
                       {"total_attempts", r.total_attempts},
                       {"seed", r.seed},
                       {"config_echo", r.config_echo}};
    if (r.metrics.has_value()) j["metric_report"] = *r.metrics;
}

void from_json(const nlohmann::json& j, RunReport& r) {
    j.at("schema_version").get_to(r.schema_version);
    r.status = run_status_from_string(j.at("status").get<std::string>());
    j.at("initial_text").get_to(r.initial_text);
    j.at("final_text").get_to(r.final_text);
    j.at("final_energy").get_to(r.final_energy);
    j.at("energy_trajectory").get_to(r.energy_trajectory);
    j.at("prompts").get_to(r.prompts);
    j.at("attempts").get_to(r.attempts);
    j.at("per_iteration").get_to(r.per_iteration);
    j.at("final_scores").get_to(r.final_scores);
    j.at("stalled_stages").get_to(r.stalled_stages);
    j.at("accepted_iterations").get_to(r.accepted_iterations);
    j.at("total_attempts").get_to(r.total_attempts);
    j.at("seed").get_to(r.seed);
    r.config_echo = j.at("config_echo");
    if (j.contains("metric_report")) {
        r.metrics = j.at("metric_report").get<MetricReport>();
    } else {
        r.metrics.reset();
    }
}

std::string serialize_report(const RunReport& report) {
    nlohmann::json j = report;
    return j.dump(2) + "\n";
}

RunReport parse_report(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("parse_report: invalid JSON: ") + e.what());
    }
    try {
        return j.get<RunReport>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("parse_report: bad report structure: ") + e.what());
    }
}

}  // namespace c3tg
