// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "c3tg/errors.hpp"

namespace c3tg {

namespace {

namespace fs = std::filesystem;

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
    return (fs::path(base_dir) / p).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    if (!fs::exists(path)) {
        throw ValidationError(what + " file does not exist: '" + path + "'");
    }
}

AttributeSpec attribute_from_json(const nlohmann::json& j) {
    AttributeSpec spec;
    spec.id = j.at("id").get<std::string>();
    if (j.contains("target")) spec.target = j.at("target").get<double>();
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("lambda")) spec.lambda = j.at("lambda").get<double>();
    if (j.contains("role")) {
        spec.role = attribute_role_from_string(j.at("role").get<std::string>());
    }
    return spec;
}

nlohmann::json attribute_to_json(const AttributeSpec& spec) {
    return nlohmann::json{{"id", spec.id},
                          {"target", spec.target},
                          {"alpha", spec.alpha},
                          {"lambda", spec.lambda},
                          {"role", to_string(spec.role)}};
}

StageSpec stage_from_json(const nlohmann::json& j) {
    StageSpec stage;
    stage.stage = optimization_stage_from_string(j.at("stage").get<std::string>());
    if (j.contains("primary_dims")) j.at("primary_dims").get_to(stage.primary_dims);
    if (j.contains("constrained_dims")) j.at("constrained_dims").get_to(stage.constrained_dims);
    return stage;
}

nlohmann::json stage_to_json(const StageSpec& stage) {
    return nlohmann::json{{"stage", to_string(stage.stage)},
                          {"primary_dims", stage.primary_dims},
                          {"constrained_dims", stage.constrained_dims}};
}

CorrelationMatrix matrix_from_json(const nlohmann::json& j) {
    CorrelationMatrix matrix;
    j.at("dims").get_to(matrix.dims);
    j.at("rho").get_to(matrix.rho);
    if (j.contains("degenerate_dims")) j.at("degenerate_dims").get_to(matrix.degenerate_dims);
    if (matrix.rho.size() != matrix.dims.size()) {
        throw ValidationError("penalty matrix: rho row count does not match dims");
    }
    for (const auto& row : matrix.rho) {
        if (row.size() != matrix.dims.size()) {
            throw ValidationError("penalty matrix: ragged rho row");
        }
    }
    return matrix;
}

}  // namespace

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j, fs::path(path).parent_path().string());
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
    RunConfig config;
    try {
        if (j.contains("schema_version")) {
            config.schema_version = j.at("schema_version").get<int>();
        }
        for (const auto& item : j.at("attributes")) {
            config.attributes.push_back(attribute_from_json(item));
        }
        if (j.contains("optimization")) {
            const auto& o = j.at("optimization");
            auto& opt = config.optimization;
            if (o.contains("tau")) opt.tau = o.at("tau").get<double>();
            if (o.contains("max_iterations")) opt.max_iterations = o.at("max_iterations").get<int>();
            if (o.contains("attempts_per_iteration")) {
                opt.attempts_per_iteration = o.at("attempts_per_iteration").get<int>();
            }
            if (o.contains("early_stop_consecutive")) {
                opt.early_stop_consecutive = o.at("early_stop_consecutive").get<int>();
            }
            if (o.contains("early_stop_tau") && !o.at("early_stop_tau").is_null()) {
                opt.early_stop_tau = o.at("early_stop_tau").get<double>();
            }
            if (o.contains("significant_threshold")) {
                opt.significant_threshold = o.at("significant_threshold").get<double>();
            }
            if (o.contains("maintain_shift_threshold")) {
                opt.maintain_shift_threshold = o.at("maintain_shift_threshold").get<double>();
            }
            if (o.contains("residual_threshold")) {
                opt.residual_threshold = o.at("residual_threshold").get<double>();
            }
            if (o.contains("seed")) opt.seed = o.at("seed").get<std::uint64_t>();
            if (o.contains("stage_plan")) {
                for (const auto& s : o.at("stage_plan")) {
                    opt.stage_plan.push_back(stage_from_json(s));
                }
            }
        }
        if (j.contains("penalty")) {
            const auto& p = j.at("penalty");
            if (p.contains("c")) config.penalty.c = p.at("c").get<double>();
            if (p.contains("matrix_path")) {
                config.penalty.matrix_path =
                    resolve_path(p.at("matrix_path").get<std::string>(), base_dir);
            }
            if (p.contains("matrix")) {
                config.penalty.inline_matrix = matrix_from_json(p.at("matrix"));
            }
        }
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            if (b.contains("type")) config.backend.type = b.at("type").get<std::string>();
            if (b.contains("substitutions_path")) {
                config.backend.substitutions_path =
                    resolve_path(b.at("substitutions_path").get<std::string>(), base_dir);
            }
            if (b.contains("endpoint_url")) {
                config.backend.http.endpoint_url = b.at("endpoint_url").get<std::string>();
            }
            if (b.contains("timeout_ms")) {
                config.backend.http.timeout_ms = b.at("timeout_ms").get<int>();
            }
            if (b.contains("max_retries")) {
                config.backend.http.max_retries = b.at("max_retries").get<int>();
            }
            if (b.contains("backoff_base_ms")) {
                config.backend.http.backoff_base_ms = b.at("backoff_base_ms").get<int>();
            }
            if (b.contains("auth_token_env")) {
                config.backend.auth_token_env = b.at("auth_token_env").get<std::string>();
            }
            if (b.contains("max_tokens")) {
                config.backend.params.max_tokens = b.at("max_tokens").get<int>();
            }
            if (b.contains("temperature")) {
                config.backend.params.temperature = b.at("temperature").get<double>();
            }
        }
        if (j.contains("scorers")) {
            const auto& s = j.at("scorers");
            if (s.contains("type")) config.scorers.type = s.at("type").get<std::string>();
            if (s.contains("squash_gain")) {
                config.scorers.squash_gain = s.at("squash_gain").get<double>();
            }
            if (s.contains("lexicons")) {
                for (const auto& [id, path] : s.at("lexicons").items()) {
                    config.scorers.lexicon_paths[id] =
                        resolve_path(path.get<std::string>(), base_dir);
                }
            }
        }
        if (j.contains("metrics")) {
            const auto& m = j.at("metrics");
            if (m.contains("distinct_ns")) m.at("distinct_ns").get_to(config.metrics.distinct_ns);
            if (m.contains("ppl_model_path")) {
                config.metrics.ppl_model_path =
                    resolve_path(m.at("ppl_model_path").get<std::string>(), base_dir);
            }
            if (m.contains("ppl_order")) config.metrics.ppl_order = m.at("ppl_order").get<int>();
            if (m.contains("ppl_k")) config.metrics.ppl_k = m.at("ppl_k").get<double>();
        }
        if (j.contains("templates")) {
            const auto& t = j.at("templates");
            auto read = [&](const char* key) {
                return t.contains(key) ? resolve_path(t.at(key).get<std::string>(), base_dir)
                                       : std::string();
            };
            config.templates.core_calibration = read("core_calibration");
            config.templates.balancing = read("balancing");
            config.templates.global_finetune = read("global_finetune");
            config.templates.one_shot = read("one_shot");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return config;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json attrs = nlohmann::json::array();
    for (const auto& spec : attributes) attrs.push_back(attribute_to_json(spec));

    nlohmann::json opt{{"tau", optimization.tau},
                       {"max_iterations", optimization.max_iterations},
                       {"attempts_per_iteration", optimization.attempts_per_iteration},
                       {"early_stop_consecutive", optimization.early_stop_consecutive},
                       {"significant_threshold", optimization.significant_threshold},
                       {"maintain_shift_threshold", optimization.maintain_shift_threshold},
                       {"residual_threshold", optimization.residual_threshold},
                       {"seed", optimization.seed}};
    if (optimization.early_stop_tau.has_value()) {
        opt["early_stop_tau"] = *optimization.early_stop_tau;
    }
    if (!optimization.stage_plan.empty()) {
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& stage : optimization.stage_plan) stages.push_back(stage_to_json(stage));
        opt["stage_plan"] = stages;
    }

    nlohmann::json pen{{"c", penalty.c}};
    if (!penalty.matrix_path.empty()) pen["matrix_path"] = penalty.matrix_path;
    if (penalty.inline_matrix.has_value()) {
        pen["matrix"] = nlohmann::json{{"dims", penalty.inline_matrix->dims},
                                       {"rho", penalty.inline_matrix->rho},
                                       {"degenerate_dims", penalty.inline_matrix->degenerate_dims}};
    }

    nlohmann::json back{{"type", backend.type},
                        {"max_tokens", backend.params.max_tokens},
                        {"temperature", backend.params.temperature}};
    if (!backend.substitutions_path.empty()) {
        back["substitutions_path"] = backend.substitutions_path;
    }
    if (!backend.http.endpoint_url.empty()) {
        back["endpoint_url"] = backend.http.endpoint_url;
        back["timeout_ms"] = backend.http.timeout_ms;
        back["max_retries"] = backend.http.max_retries;
        back["backoff_base_ms"] = backend.http.backoff_base_ms;
        back["auth_token_env"] = backend.auth_token_env;
    }

    nlohmann::json scor{{"type", scorers.type}, {"squash_gain", scorers.squash_gain}};
    if (!scorers.lexicon_paths.empty()) scor["lexicons"] = scorers.lexicon_paths;

    nlohmann::json metr{{"distinct_ns", metrics.distinct_ns},
                        {"ppl_order", metrics.ppl_order},
                        {"ppl_k", metrics.ppl_k}};
    if (!metrics.ppl_model_path.empty()) metr["ppl_model_path"] = metrics.ppl_model_path;

    nlohmann::json out{{"schema_version", schema_version}, {"attributes", attrs},
                       {"optimization", opt},              {"penalty", pen},
                       {"backend", back},                  {"scorers", scor},
                       {"metrics", metr}};
    nlohmann::json tmpl = nlohmann::json::object();
    if (!templates.core_calibration.empty()) tmpl["core_calibration"] = templates.core_calibration;
    if (!templates.balancing.empty()) tmpl["balancing"] = templates.balancing;
    if (!templates.global_finetune.empty()) tmpl["global_finetune"] = templates.global_finetune;
    if (!templates.one_shot.empty()) tmpl["one_shot"] = templates.one_shot;
    if (!tmpl.empty()) out["templates"] = tmpl;
    return out;
}

void RunConfig::validate() const {
    if (attributes.empty()) throw ValidationError("config: no attributes defined");
    std::set<std::string> ids;
    bool any_active = false;
    for (const auto& spec : attributes) {
        spec.validate();
        if (!ids.insert(spec.id).second) {
            throw ValidationError("config: duplicate attribute id '" + spec.id + "'");
        }
        if (spec.role != AttributeRole::inactive) any_active = true;
    }
    if (!any_active) throw ValidationError("config: every attribute is inactive");

    optimization.validate();
    if (!optimization.stage_plan.empty()) {
        validate_stage_plan(optimization.stage_plan, attributes);
    }

    if (!(penalty.c > 0.0)) throw ValidationError("config: penalty.c must be > 0");
    require_file(penalty.matrix_path, "penalty matrix");

    if (backend.type != "synthetic" && backend.type != "http" && backend.type != "echo") {
        throw ValidationError("config: unknown backend type '" + backend.type + "'");
    }
    if (backend.type == "synthetic") {
        require_file(backend.substitutions_path, "substitution table");
    }
    if (backend.type == "http") {
        if (backend.http.endpoint_url.empty()) {
            throw ValidationError("config: http backend requires endpoint_url");
        }
        backend.http.validate();
    }

    if (scorers.type != "lexicon") {
        throw ValidationError("config: unknown scorer type '" + scorers.type + "'");
    }
    for (const auto& [id, path] : scorers.lexicon_paths) {
        require_file(path, "lexicon for '" + id + "'");
    }
    for (const auto& spec : attributes) {
        if (spec.role == AttributeRole::inactive) continue;
        if (scorers.lexicon_paths.find(spec.id) == scorers.lexicon_paths.end()) {
            throw ValidationError("config: no scorer lexicon for attribute '" + spec.id + "'");
        }
    }

    for (int n : metrics.distinct_ns) {
        if (n < 1) throw ValidationError("config: distinct_ns entries must be >= 1");
    }
    if (metrics.ppl_order < 1) throw ValidationError("config: ppl_order must be >= 1");
    if (!(metrics.ppl_k > 0.0)) throw ValidationError("config: ppl_k must be > 0");
    require_file(metrics.ppl_model_path, "perplexity model corpus");

    require_file(templates.core_calibration, "stage-1 template");
    require_file(templates.balancing, "stage-2 template");
    require_file(templates.global_finetune, "stage-3 template");
    require_file(templates.one_shot, "one-shot template");
}

}  // namespace c3tg
