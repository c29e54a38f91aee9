// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "c3tg/errors.hpp"
#include "c3tg/random.hpp"
#include "c3tg/text.hpp"

namespace c3tg {

namespace fs = std::filesystem;

std::vector<std::string> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
    std::vector<std::string> texts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (char ch : line) {
            if (!std::isspace(static_cast<unsigned char>(ch))) {
                blank = false;
                break;
            }
        }
        if (blank) {
            std::cerr << "warning: skipping blank line " << line_no << " in '" << path << "'\n";
            continue;
        }
        texts.push_back(line);
    }
    return texts;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write file '" + tmp.string() + "'");
        out << content;
        if (!out) throw ValidationError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(field);
    return fields;
}

}  // namespace

ScoreSampleMatrix read_score_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open score samples CSV '" + path + "'");
    ScoreSampleMatrix samples;
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("score samples CSV '" + path + "' is empty");
    }
    samples.dims = split_csv_line(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != samples.dims.size()) {
            throw ValidationError("score samples CSV '" + path + "' line " +
                                  std::to_string(line_no) + ": expected " +
                                  std::to_string(samples.dims.size()) + " fields");
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            try {
                row.push_back(std::stod(f));
            } catch (const std::exception&) {
                throw ValidationError("score samples CSV '" + path + "' line " +
                                      std::to_string(line_no) + ": bad number '" + f + "'");
            }
        }
        samples.rows.push_back(std::move(row));
    }
    return samples;
}

std::string correlation_matrix_csv(const CorrelationMatrix& matrix) {
    std::ostringstream out;
    out << "dim";
    for (const auto& dim : matrix.dims) out << ',' << dim;
    out << '\n';
    for (std::size_t i = 0; i < matrix.dims.size(); ++i) {
        out << matrix.dims[i];
        for (std::size_t j = 0; j < matrix.dims.size(); ++j) {
            out << ',' << format_double(matrix.rho[i][j]);
        }
        out << '\n';
    }
    if (!matrix.degenerate_dims.empty()) {
        out << "#degenerate";
        for (const auto& dim : matrix.degenerate_dims) out << ',' << dim;
        out << '\n';
    }
    return out.str();
}

CorrelationMatrix read_correlation_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open correlation matrix CSV '" + path + "'");
    CorrelationMatrix matrix;
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("correlation matrix CSV '" + path + "' is empty");
    }
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "dim") {
        throw ValidationError("correlation matrix CSV '" + path +
                              "': header must start with 'dim'");
    }
    matrix.dims.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("#degenerate", 0) == 0) {
            auto fields = split_csv_line(line);
            matrix.degenerate_dims.assign(fields.begin() + 1, fields.end());
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != matrix.dims.size() + 1) {
            throw ValidationError("correlation matrix CSV '" + path + "': ragged row");
        }
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                row.push_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw ValidationError("correlation matrix CSV '" + path + "': bad number '" +
                                      fields[i] + "'");
            }
        }
        matrix.rho.push_back(std::move(row));
    }
    if (matrix.rho.size() != matrix.dims.size()) {
        throw ValidationError("correlation matrix CSV '" + path + "': " +
                              std::to_string(matrix.rho.size()) + " rows for " +
                              std::to_string(matrix.dims.size()) + " dims");
    }
    return matrix;
}

void read_calibration_csv(const std::string& path, std::vector<double>& logits,
                          std::vector<int>& labels) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open calibration CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("calibration CSV '" + path + "' is empty");
    auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "logit" || header[1] != "label") {
        throw ValidationError("calibration CSV '" + path + "': header must be 'logit,label'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw ValidationError("calibration CSV '" + path + "' line " +
                                  std::to_string(line_no) + ": expected 2 fields");
        }
        try {
            logits.push_back(std::stod(fields[0]));
            const int label = std::stoi(fields[1]);
            if (label != 0 && label != 1) {
                throw ValidationError("calibration CSV '" + path + "' line " +
                                      std::to_string(line_no) + ": label must be 0 or 1");
            }
            labels.push_back(label);
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("calibration CSV '" + path + "' line " +
                                  std::to_string(line_no) + ": bad number");
        }
    }
}

std::vector<double> default_tau_grid() {
    return {0.10, 0.08, 0.06, 0.05, 0.04, 0.035, 0.030, 0.028, 0.026, 0.025, 0.024, 0.022, 0.020};
}

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

SubstitutionTable load_substitution_table(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("substitution table '" + path + "' is not valid JSON: " + e.what());
    }
    SubstitutionTable table;
    for (const auto& [dim, entry] : j.items()) {
        SubstitutionEntry sub;
        if (entry.contains("insert")) entry.at("insert").get_to(sub.insertable);
        if (entry.contains("remove")) entry.at("remove").get_to(sub.removable);
        table[dim] = std::move(sub);
    }
    return table;
}

NGramModel train_ppl_model(const MetricsConfig& metrics, const std::string& fallback_text) {
    std::vector<std::vector<std::string>> sentences;
    if (!metrics.ppl_model_path.empty()) {
        for (const auto& text : load_corpus(metrics.ppl_model_path)) {
            sentences.push_back(tokenize(text));
        }
    } else {
        sentences.push_back(tokenize(fallback_text));
    }
    sentences.erase(std::remove_if(sentences.begin(), sentences.end(),
                                   [](const auto& s) { return s.empty(); }),
                    sentences.end());
    if (sentences.empty()) sentences.push_back({"<unk>"});
    return NGramModel::train_from_sentences(sentences, metrics.ppl_order, metrics.ppl_k);
}

}  // namespace

Harness::Harness(RunConfig config) : config_(std::move(config)) {
    config_.validate();

    for (const auto& [id, path] : config_.scorers.lexicon_paths) {
        scorers_[id] = std::make_shared<LexiconScorer>(
            LexiconScorer::from_file(path, config_.scorers.squash_gain));
    }
    require_scorers(config_.attributes, scorers_);

    if (config_.backend.type == "synthetic") {
        rewriter_ = std::make_shared<SyntheticRewriter>(
            load_substitution_table(config_.backend.substitutions_path));
    } else if (config_.backend.type == "echo") {
        rewriter_ = std::make_shared<EchoRewriter>();
    } else {
        BackendConfig http = config_.backend.http;
        if (!http.auth_token.has_value() && !config_.backend.auth_token_env.empty()) {
            if (const char* token = std::getenv(config_.backend.auth_token_env.c_str())) {
                http.auth_token = std::string(token);
            }
        }
        rewriter_ = std::make_shared<HttpRewriter>(http);
    }

    penalty_.c = config_.penalty.c;
    if (config_.penalty.inline_matrix.has_value()) {
        penalty_.matrix = *config_.penalty.inline_matrix;
    } else if (!config_.penalty.matrix_path.empty()) {
        penalty_.matrix = read_correlation_matrix_csv(config_.penalty.matrix_path);
    } else {
        // No correlations supplied: uniform zero matrix over the active
        // dims; beta derivation falls back to c/2 for every dim.
        for (const auto& spec : config_.attributes) {
            if (spec.role != AttributeRole::inactive) penalty_.matrix.dims.push_back(spec.id);
        }
        penalty_.matrix.rho.assign(penalty_.matrix.dims.size(),
                                   std::vector<double>(penalty_.matrix.dims.size(), 0.0));
        for (std::size_t i = 0; i < penalty_.matrix.dims.size(); ++i) {
            penalty_.matrix.rho[i][i] = 1.0;
        }
    }

    templates_ = PromptTemplates::defaults();
    if (!config_.templates.core_calibration.empty()) {
        templates_.core_calibration = read_text_file(config_.templates.core_calibration);
    }
    if (!config_.templates.balancing.empty()) {
        templates_.balancing = read_text_file(config_.templates.balancing);
    }
    if (!config_.templates.global_finetune.empty()) {
        templates_.global_finetune = read_text_file(config_.templates.global_finetune);
    }
    if (!config_.templates.one_shot.empty()) {
        templates_.one_shot = read_text_file(config_.templates.one_shot);
    }

    if (!config_.metrics.ppl_model_path.empty()) {
        ppl_model_ = train_ppl_model(config_.metrics, "");
    }
}

MetricReport Harness::compute_metrics(const std::string& final_text,
                                      const ScoreVector& final_scores,
                                      const ScoreVector& initial_scores,
                                      const std::string& initial_text) const {
    MetricReport report;
    const std::vector<std::string> tokens = tokenize(final_text);
    for (int n : config_.metrics.distinct_ns) {
        if (tokens.size() >= static_cast<std::size_t>(n)) {
            report.distinct[n] = distinct_n(tokens, n);
        }
    }
    if (!tokens.empty()) {
        if (ppl_model_.has_value()) {
            report.ppl_proxy = ngram_perplexity(tokens, *ppl_model_);
        } else {
            report.ppl_proxy = ngram_perplexity(tokens, train_ppl_model(config_.metrics,
                                                                        initial_text));
        }
    }

    std::set<std::string> target_dims;
    bool has_non_target = false;
    for (const auto& spec : config_.attributes) {
        if (spec.role == AttributeRole::primary_optimization) target_dims.insert(spec.id);
        if (spec.role == AttributeRole::stability_constrained) has_non_target = true;
    }
    if (!target_dims.empty()) {
        report.avg_abs_bias = average_abs_bias(final_scores, config_.attributes, target_dims);
    }
    // drift is vacuously 0 when every active dim is a target
    report.drift = has_non_target ? drift(final_scores, initial_scores, target_dims) : 0.0;
    return report;
}

RunReport Harness::finish_report(OptimizationResult result, const std::string& input_text,
                                 std::uint64_t seed) {
    RunReport report;
    report.status = result.status;
    report.initial_text = result.initial_text;
    report.final_text = result.final_text;
    report.final_energy = result.final_energy;
    report.energy_trajectory = std::move(result.energy_trajectory);
    report.prompts = std::move(result.prompts);
    report.attempts = std::move(result.attempts);
    report.per_iteration = std::move(result.per_iteration);
    report.final_scores = result.final_scores;
    report.stalled_stages = std::move(result.stalled_stages);
    report.accepted_iterations = result.accepted_iterations;
    report.total_attempts = result.total_attempts;
    report.seed = seed;

    const ScoreVector& initial_scores = report.per_iteration.front().scores;
    report.metrics =
        compute_metrics(report.final_text, report.final_scores, initial_scores, input_text);

    RunConfig echo = config_;
    echo.optimization.seed = seed;
    report.config_echo = echo.to_json();
    return report;
}

RunReport Harness::run_text(const std::string& input_text,
                            std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(config_.optimization.seed);
    RunInputs inputs;
    inputs.specs = config_.attributes;
    inputs.config = config_.optimization;
    inputs.config.seed = seed;
    inputs.penalty = penalty_;
    inputs.templates = templates_;
    inputs.rewrite_params = config_.backend.params;
    inputs.run_id = fnv1a_hex(input_text) + "-" + std::to_string(seed);

    OptimizationResult result = run_optimization(input_text, inputs, *rewriter_, scorers_);
    return finish_report(std::move(result), input_text, seed);
}

RunReport Harness::one_shot_text(const std::string& input_text,
                                 std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(config_.optimization.seed);
    const ScoreVector initial_scores = score_all(input_text, scorers_);
    const RewritePrompt prompt =
        build_one_shot_prompt(input_text, initial_scores, config_.attributes, templates_);

    PenaltyConfig no_penalty;
    no_penalty.c = penalty_.c;
    EnergyBreakdown initial =
        total_energy(initial_scores, std::nullopt, config_.attributes, no_penalty, {});

    RunReport report;
    report.seed = seed;
    report.initial_text = input_text;
    report.per_iteration.push_back(
        IterationRecord{0, initial_scores.text_hash, initial_scores, initial});
    report.energy_trajectory.push_back(initial);
    report.prompts.push_back(
        PromptLogEntry{0, OptimizationStage::core_calibration, 1, prompt.directives,
                       prompt.rendered});

    RewriteRequest request;
    request.prompt = prompt.rendered;
    request.source_text = input_text;
    request.max_tokens = config_.backend.params.max_tokens;
    request.temperature = config_.backend.params.temperature;
    request.request_id = fnv1a_hex(input_text) + "-oneshot-" + std::to_string(seed);

    std::string candidate;
    try {
        candidate = rewriter_->rewrite(request, prompt.directives, mix_seed(seed, 1));
        if (candidate.empty()) {
            throw BackendError(BackendError::Kind::empty_output, "rewriter returned empty text");
        }
    } catch (const BackendError& e) {
        report.status = RunStatus::backend_failure;
        report.final_text = input_text;
        report.final_energy = initial.total;
        report.final_scores = initial_scores;
        report.attempts.push_back(AttemptLogEntry{
            0, 1, 1, "", -1.0, false, std::string("backend:") + e.kind_name() + ": " + e.what()});
        report.metrics = compute_metrics(input_text, initial_scores, initial_scores, input_text);
        RunConfig echo = config_;
        echo.optimization.seed = seed;
        report.config_echo = echo.to_json();
        return report;
    }

    // The baseline accepts its single rewrite unconditionally.
    const ScoreVector final_scores = score_all(candidate, scorers_);
    EnergyBreakdown final_breakdown =
        total_energy(final_scores, initial_scores, config_.attributes, no_penalty, {});
    report.status = RunStatus::exhausted;
    report.final_text = candidate;
    report.final_energy = final_breakdown.total;
    report.final_scores = final_scores;
    report.energy_trajectory.push_back(final_breakdown);
    report.per_iteration.push_back(
        IterationRecord{1, final_scores.text_hash, final_scores, final_breakdown});
    report.attempts.push_back(
        AttemptLogEntry{0, 1, 1, fnv1a_hex(candidate), final_breakdown.total, true, ""});
    report.accepted_iterations = 1;
    report.total_attempts = 1;
    report.metrics = compute_metrics(candidate, final_scores, initial_scores, input_text);
    RunConfig echo = config_;
    echo.optimization.seed = seed;
    report.config_echo = echo.to_json();
    return report;
}

std::vector<TauSweepRow> sweep_tau(const RunConfig& config, const std::vector<double>& taus,
                                   const std::vector<std::string>& corpus) {
    if (taus.size() < 2) throw ValidationError("sweep_tau: need at least 2 tau values");
    if (corpus.empty()) throw ValidationError("sweep_tau: empty corpus");

    std::vector<TauSweepRow> rows;
    rows.reserve(taus.size());
    for (double tau : taus) {
        RunConfig tau_config = config;
        tau_config.optimization.tau = tau;
        Harness harness(tau_config);
        double bias_sum = 0.0;
        double iter_sum = 0.0;
        double attempt_sum = 0.0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const RunReport report =
                harness.run_text(corpus[i], mix_seed(config.optimization.seed, i));
            bias_sum += report.metrics->avg_abs_bias;
            iter_sum += report.accepted_iterations;
            attempt_sum += report.total_attempts;
        }
        TauSweepRow row;
        row.tau = tau;
        row.mean_avg_abs_bias = bias_sum / static_cast<double>(corpus.size());
        row.mean_accepted_iterations = iter_sum / static_cast<double>(corpus.size());
        row.mean_attempts = attempt_sum / static_cast<double>(corpus.size());
        row.is_default = std::abs(tau - kDefaultTau) < 1e-12;
        rows.push_back(row);
    }
    return rows;
}

std::string tau_sweep_csv(const std::vector<TauSweepRow>& rows) {
    std::ostringstream out;
    out << "tau,mean_avg_abs_bias,mean_accepted_iterations,mean_attempts,is_default\n";
    for (const auto& row : rows) {
        out << format_double(row.tau) << ',' << format_double(row.mean_avg_abs_bias) << ','
            << format_double(row.mean_accepted_iterations) << ','
            << format_double(row.mean_attempts) << ',' << (row.is_default ? 1 : 0) << '\n';
    }
    return out.str();
}

ConflictScenario conflict_scenario_from_string(const std::string& name) {
    if (name == "conflict") return ConflictScenario::conflict;
    if (name == "overlap") return ConflictScenario::overlap;
    throw ValidationError("unknown scenario '" + name + "' (expected conflict or overlap)");
}

const char* to_string(ConflictScenario scenario) {
    return scenario == ConflictScenario::conflict ? "conflict" : "overlap";
}

std::vector<AttributeSpec> scenario_attributes(ConflictScenario scenario) {
    auto make = [](const std::string& id, double target) {
        AttributeSpec spec;
        spec.id = id;
        spec.target = target;
        spec.alpha = 1.0;
        spec.lambda = 1.0;
        spec.role = AttributeRole::primary_optimization;
        return spec;
    };
    std::vector<AttributeSpec> specs;
    if (scenario == ConflictScenario::conflict) {
        specs.push_back(make("emotion.fear", 0.7));
        specs.push_back(make("emotion.joy", 1.0));
    } else {
        specs.push_back(make("emotion.love", 0.7));
        specs.push_back(make("style.romance", 0.7));
    }
    specs.push_back(make("style.polite", 0.5));
    specs.push_back(make("tone.casual", 0.5));
    specs.push_back(make("topic.knowledge", 0.5));
    specs.push_back(make("toxicity.non-toxic", 1.0));
    std::sort(specs.begin(), specs.end(),
              [](const AttributeSpec& a, const AttributeSpec& b) { return a.id < b.id; });
    return specs;
}

std::vector<std::string> scenario_target_dims(ConflictScenario scenario) {
    if (scenario == ConflictScenario::conflict) return {"emotion.fear", "emotion.joy"};
    return {"emotion.love", "style.romance"};
}

ConflictSummary run_conflict(const RunConfig& base_config, ConflictScenario scenario,
                             const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw ValidationError("run_conflict: empty corpus");

    RunConfig config = base_config;
    config.attributes = scenario_attributes(scenario);
    Harness harness(config);

    const std::vector<std::string> target_vec = scenario_target_dims(scenario);
    const std::set<std::string> target_dims(target_vec.begin(), target_vec.end());

    ConflictSummary summary;
    summary.scenario = scenario;

    auto arm_metrics = [&](const RunReport& report) {
        ArmMetrics arm;
        const ScoreVector& initial_scores = report.per_iteration.front().scores;
        arm.avg_abs_bias = average_abs_bias(report.final_scores, config.attributes, target_dims);
        arm.drift = drift(report.final_scores, initial_scores, target_dims);
        arm.ppl_proxy = report.metrics.has_value() ? report.metrics->ppl_proxy : 0.0;
        arm.accepted_iterations = report.accepted_iterations;
        arm.status = to_string(report.status);
        return arm;
    };

    std::size_t bias_improved = 0;
    std::size_t drift_improved = 0;
    ArmMetrics full_sum;
    ArmMetrics shot_sum;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::uint64_t seed = mix_seed(config.optimization.seed, i);
        const RunReport full = harness.run_text(corpus[i], seed);
        const RunReport shot = harness.one_shot_text(corpus[i], seed);
        if (summary.one_shot_prompt_example.empty() && !shot.prompts.empty()) {
            summary.one_shot_prompt_example = shot.prompts.front().rendered;
        }
        ConflictRow row;
        row.index = i;
        row.full_loop = arm_metrics(full);
        row.one_shot = arm_metrics(shot);
        if (row.full_loop.avg_abs_bias < row.one_shot.avg_abs_bias) ++bias_improved;
        if (row.full_loop.drift < row.one_shot.drift) ++drift_improved;
        full_sum.avg_abs_bias += row.full_loop.avg_abs_bias;
        full_sum.ppl_proxy += row.full_loop.ppl_proxy;
        full_sum.drift += row.full_loop.drift;
        full_sum.accepted_iterations += row.full_loop.accepted_iterations;
        shot_sum.avg_abs_bias += row.one_shot.avg_abs_bias;
        shot_sum.ppl_proxy += row.one_shot.ppl_proxy;
        shot_sum.drift += row.one_shot.drift;
        shot_sum.accepted_iterations += row.one_shot.accepted_iterations;
        summary.rows.push_back(std::move(row));
    }

    const double n = static_cast<double>(corpus.size());
    summary.full_loop_mean.avg_abs_bias = full_sum.avg_abs_bias / n;
    summary.full_loop_mean.ppl_proxy = full_sum.ppl_proxy / n;
    summary.full_loop_mean.drift = full_sum.drift / n;
    summary.one_shot_mean.avg_abs_bias = shot_sum.avg_abs_bias / n;
    summary.one_shot_mean.ppl_proxy = shot_sum.ppl_proxy / n;
    summary.one_shot_mean.drift = shot_sum.drift / n;
    summary.fraction_bias_improved = static_cast<double>(bias_improved) / n;
    summary.fraction_drift_improved = static_cast<double>(drift_improved) / n;
    return summary;
}

nlohmann::json conflict_summary_json(const ConflictSummary& summary) {
    auto arm = [](const ArmMetrics& m) {
        return nlohmann::json{{"avg_abs_bias", m.avg_abs_bias},
                              {"ppl_proxy", m.ppl_proxy},
                              {"drift", m.drift}};
    };
    return nlohmann::json{{"scenario", to_string(summary.scenario)},
                          {"texts", summary.rows.size()},
                          {"full_loop_mean", arm(summary.full_loop_mean)},
                          {"one_shot_mean", arm(summary.one_shot_mean)},
                          {"fraction_bias_improved", summary.fraction_bias_improved},
                          {"fraction_drift_improved", summary.fraction_drift_improved},
                          {"one_shot_prompt_example", summary.one_shot_prompt_example}};
}

std::string conflict_rows_csv(const ConflictSummary& summary) {
    std::ostringstream out;
    out << "index,arm,avg_abs_bias,ppl_proxy,drift,accepted_iterations,status\n";
    for (const auto& row : summary.rows) {
        out << row.index << ",full," << format_double(row.full_loop.avg_abs_bias) << ','
            << format_double(row.full_loop.ppl_proxy) << ',' << format_double(row.full_loop.drift)
            << ',' << row.full_loop.accepted_iterations << ',' << row.full_loop.status << '\n';
        out << row.index << ",one_shot," << format_double(row.one_shot.avg_abs_bias) << ','
            << format_double(row.one_shot.ppl_proxy) << ',' << format_double(row.one_shot.drift)
            << ',' << row.one_shot.accepted_iterations << ',' << row.one_shot.status << '\n';
    }
    return out.str();
}

std::vector<CSweepRow> sweep_penalty_c(const RunConfig& config,
                                       const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw ValidationError("sweep_penalty_c: empty corpus");
    std::vector<CSweepRow> rows;
    for (double c : penalty_c_grid()) {
        RunConfig c_config = config;
        c_config.penalty.c = c;
        Harness harness(c_config);
        double bias_sum = 0.0;
        double drift_sum = 0.0;
        double iter_sum = 0.0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const RunReport report =
                harness.run_text(corpus[i], mix_seed(config.optimization.seed, i));
            bias_sum += report.metrics->avg_abs_bias;
            drift_sum += report.metrics->drift;
            iter_sum += report.accepted_iterations;
        }
        CSweepRow row;
        row.c = c;
        row.mean_avg_abs_bias = bias_sum / static_cast<double>(corpus.size());
        row.mean_drift = drift_sum / static_cast<double>(corpus.size());
        row.mean_accepted_iterations = iter_sum / static_cast<double>(corpus.size());
        rows.push_back(row);
    }
    return rows;
}

std::string c_sweep_csv(const std::vector<CSweepRow>& rows) {
    std::ostringstream out;
    out << "c,mean_avg_abs_bias,mean_drift,mean_accepted_iterations\n";
    for (const auto& row : rows) {
        out << format_double(row.c) << ',' << format_double(row.mean_avg_abs_bias) << ','
            << format_double(row.mean_drift) << ',' << format_double(row.mean_accepted_iterations)
            << '\n';
    }
    return out.str();
}

CorrelateOutput correlate_scores(const ScoreSampleMatrix& samples,
                                 const std::vector<std::string>& target_dims, double c) {
    CorrelateOutput out;
    out.matrix = pearson_matrix(samples);
    std::vector<std::string> targets = target_dims;
    if (targets.empty()) targets = out.matrix.dims;  // derive betas for every dim
    for (const auto& dim : targets) {
        out.betas_by_target[dim] = derive_betas(out.matrix, dim, c);
    }
    return out;
}

nlohmann::json betas_json(const CorrelateOutput& output, double c) {
    nlohmann::json targets = nlohmann::json::object();
    for (const auto& [dim, penalty] : output.betas_by_target) {
        targets[dim] = penalty;
    }
    return nlohmann::json{{"c", c},
                          {"dims", output.matrix.dims},
                          {"degenerate_dims", output.matrix.degenerate_dims},
                          {"targets", targets}};
}

}  // namespace c3tg
