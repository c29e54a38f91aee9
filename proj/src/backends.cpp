// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/backends.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "c3tg/errors.hpp"
#include "c3tg/random.hpp"
#include "c3tg/text.hpp"

namespace c3tg {

const char* to_string(AdjustDirection direction) {
    switch (direction) {
        case AdjustDirection::increase: return "increase";
        case AdjustDirection::decrease: return "decrease";
        case AdjustDirection::maintain: return "maintain";
    }
    return "unknown";
}

const char* to_string(AdjustIntensity intensity) {
    switch (intensity) {
        case AdjustIntensity::slight: return "slightly";
        case AdjustIntensity::significant: return "significantly";
    }
    return "unknown";
}

std::string display_name(const std::string& attribute_id) {
    const auto dot = attribute_id.rfind('.');
    std::string name = dot == std::string::npos ? attribute_id : attribute_id.substr(dot + 1);
    if (!name.empty()) {
        name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    }
    return name;
}

void RewriteRequest::validate() const {
    if (max_tokens < 1) throw ContractViolation("RewriteRequest: max_tokens must be >= 1");
    if (!(temperature >= 0.0)) throw ContractViolation("RewriteRequest: temperature must be >= 0");
}

void BackendConfig::validate() const {
    if (timeout_ms <= 0) throw ConfigurationError("BackendConfig: timeout_ms must be > 0");
    if (max_retries < 0) throw ConfigurationError("BackendConfig: max_retries must be >= 0");
    if (backoff_base_ms < 0) throw ConfigurationError("BackendConfig: backoff_base_ms must be >= 0");
}

namespace {

int directive_term_count(const RewriteDirective& directive) {
    if (!directive.intensity.has_value()) return 1;
    return *directive.intensity == AdjustIntensity::significant ? 3 : 1;
}

// Splits on spaces, keeping punctuation attached to words.
std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (char ch : text) {
        if (ch == ' ' || ch == '\n' || ch == '\t' || ch == '\r') {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(ch);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

// Core token of a word unit ("joyful." -> "joyful"), empty when the unit
// is pure punctuation or holds several tokens.
std::string word_core(const std::string& word) {
    const auto toks = tokenize(word);
    return toks.size() == 1 ? toks[0] : std::string();
}

}  // namespace

std::string synthetic_rewrite(const std::string& source,
                              std::span<const RewriteDirective> directives,
                              const SubstitutionTable& table, std::uint64_t seed) {
    if (directives.empty()) return source;

    std::vector<std::string> sentences = split_sentences(source);
    if (sentences.empty()) sentences.push_back(source);

    // Insertions first: positions are stable against later removals only
    // because removals never touch other dims' terms.
    for (const auto& directive : directives) {
        if (directive.direction != AdjustDirection::increase) continue;
        const auto entry = table.find(directive.dim);
        if (entry == table.end() || entry->second.insertable.empty()) {
            throw ConfigurationError("synthetic_rewrite: no insertable terms for dimension '" +
                                     directive.dim + "'");
        }
        const auto& terms = entry->second.insertable;
        const std::uint64_t dim_seed = mix_seed(seed, directive.dim);
        const std::size_t sentence_idx = dim_seed % sentences.size();
        const int count = directive_term_count(directive);
        std::string& sentence = sentences[sentence_idx];
        for (int i = 0; i < count; ++i) {
            const std::string& term = terms[mix_seed(dim_seed, static_cast<std::uint64_t>(i)) %
                                            terms.size()];
            auto tail = sentence.find_last_not_of(" \t\n\r");
            if (tail != std::string::npos &&
                (sentence[tail] == '.' || sentence[tail] == '!' || sentence[tail] == '?')) {
                sentence.insert(tail, " " + term);
            } else {
                sentence += " " + term;
            }
        }
    }

    std::string text;
    for (const auto& sentence : sentences) text += sentence;

    for (const auto& directive : directives) {
        if (directive.direction != AdjustDirection::decrease) continue;
        const auto entry = table.find(directive.dim);
        if (entry == table.end() || entry->second.removable.empty()) {
            throw ConfigurationError("synthetic_rewrite: no removable terms for dimension '" +
                                     directive.dim + "'");
        }
        const auto& removable = entry->second.removable;
        int budget = directive_term_count(directive);
        std::vector<std::string> words = split_words(text);
        std::vector<std::string> kept;
        kept.reserve(words.size());
        for (auto& word : words) {
            if (budget > 0) {
                const std::string core = word_core(word);
                if (!core.empty() &&
                    std::find(removable.begin(), removable.end(), core) != removable.end()) {
                    --budget;
                    // keep any punctuation the word carried
                    std::string punct;
                    for (char ch : word) {
                        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '\'') {
                            punct.push_back(ch);
                        }
                    }
                    if (!punct.empty()) kept.push_back(punct);
                    continue;
                }
            }
            kept.push_back(std::move(word));
        }
        text = join(kept, " ");
    }
    return text;
}

HttpRewriter::HttpRewriter(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    std::string url = config_.endpoint_url;
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ConfigurationError("HttpRewriter: endpoint_url must start with http:// (got '" +
                                 url + "')");
    }
    url = url.substr(scheme.size());
    const auto slash = url.find('/');
    std::string hostport = slash == std::string::npos ? url : url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    const auto colon = hostport.find(':');
    if (colon == std::string::npos) {
        host_ = hostport;
        port_ = 80;
    } else {
        host_ = hostport.substr(0, colon);
        try {
            port_ = std::stoi(hostport.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigurationError("HttpRewriter: bad port in endpoint_url '" +
                                     config_.endpoint_url + "'");
        }
    }
    if (host_.empty()) {
        throw ConfigurationError("HttpRewriter: empty host in endpoint_url");
    }
}

std::string HttpRewriter::rewrite(const RewriteRequest& request,
                                  std::span<const RewriteDirective>, std::uint64_t) {
    return rewrite_with_stats(request).text;
}

HttpRewriter::CallStats HttpRewriter::rewrite_with_stats(const RewriteRequest& request) {
    request.validate();
    nlohmann::json body = {
        {"prompt", request.prompt},  {"source", request.source_text},
        {"max_tokens", request.max_tokens}, {"temperature", request.temperature},
        {"id", request.request_id},
    };
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (config_.auth_token.has_value()) {
        headers.emplace("Authorization", "Bearer " + *config_.auth_token);
    }

    RngState jitter_rng(mix_seed(0x9d2c5680u, request.request_id));
    const int attempts_allowed = config_.max_retries + 1;
    std::string last_error;
    bool saw_5xx = false;

    CallStats stats;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
        if (attempt > 1 && config_.backoff_base_ms > 0) {
            const double base = static_cast<double>(config_.backoff_base_ms) *
                                std::pow(2.0, attempt - 2);
            const double jitter = 0.8 + 0.4 * jitter_rng.next_uniform();
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long>(base * jitter)));
        }
        stats.attempts = attempt;

        httplib::Client client(host_, port_);
        client.set_connection_timeout(config_.timeout_ms / 1000,
                                      (config_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        client.set_write_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // retry
        }
        if (res->status >= 400 && res->status < 500) {
            throw BackendError(BackendError::Kind::configuration,
                               "http_rewrite: HTTP " + std::to_string(res->status) + " from " +
                                   config_.endpoint_url);
        }
        if (res->status >= 500) {
            saw_5xx = true;
            last_error = "HTTP " + std::to_string(res->status);
            continue;  // retry
        }
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(BackendError::Kind::protocol,
                               std::string("http_rewrite: response body is not JSON: ") + e.what());
        }
        if (!parsed.contains("text") || !parsed["text"].is_string()) {
            throw BackendError(BackendError::Kind::protocol,
                               "http_rewrite: response field 'text' missing or not a string");
        }
        if (parsed.contains("id") && parsed["id"].is_string() &&
            parsed["id"].get<std::string>() != request.request_id) {
            throw BackendError(BackendError::Kind::protocol,
                               "http_rewrite: response field 'id' does not match the request");
        }
        stats.text = parsed["text"].get<std::string>();
        if (stats.text.empty()) {
            throw BackendError(BackendError::Kind::empty_output,
                               "http_rewrite: backend returned empty text");
        }
        return stats;
    }

    if (saw_5xx) {
        throw BackendError(BackendError::Kind::service,
                           "http_rewrite: service error after " +
                               std::to_string(attempts_allowed) + " attempts (" + last_error + ")");
    }
    throw BackendError(BackendError::Kind::timeout,
                       "http_rewrite: backend unreachable after " +
                           std::to_string(attempts_allowed) + " attempts (" + last_error + ")");
}

}  // namespace c3tg
