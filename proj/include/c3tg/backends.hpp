// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c3tg/directive.hpp"

namespace c3tg {

struct RewriteRequest {
    std::string prompt;
    std::string source_text;
    int max_tokens = 512;
    double temperature = 0.7;
    std::string request_id;

    void validate() const;
};

struct BackendConfig {
    std::string endpoint_url;
    int timeout_ms = 5000;
    int max_retries = 2;
    std::optional<std::string> auth_token;
    int backoff_base_ms = 200;  // doubled per retry, +/-20% jitter

    void validate() const;
};

/// Produces a candidate rewrite for a prompt. Throws BackendError on
/// failure; the optimization loop counts failures as rejected attempts.
/// `directives` carries the structured form of the prompt for backends
/// that operate on rules rather than language; `attempt_seed` makes
/// rule-based backends deterministic per attempt.
class Rewriter {
public:
    virtual ~Rewriter() = default;
    virtual std::string rewrite(const RewriteRequest& request,
                                std::span<const RewriteDirective> directives,
                                std::uint64_t attempt_seed) = 0;
};

/// Insertable / removable vocabulary for one attribute dimension.
struct SubstitutionEntry {
    std::vector<std::string> insertable;
    std::vector<std::string> removable;
};

using SubstitutionTable = std::map<std::string, SubstitutionEntry>;

/// Deterministic rule-based rewrite: increase directives insert 1 (slight)
/// or 3 (significant) terms into the sentence at hash(seed, dim) mod
/// sentence count; decrease directives remove up to that many matching
/// words; maintain directives leave the dimension's terms untouched.
std::string synthetic_rewrite(const std::string& source,
                              std::span<const RewriteDirective> directives,
                              const SubstitutionTable& table, std::uint64_t seed);

/// Rewriter wrapper over synthetic_rewrite. Pure function of its inputs.
class SyntheticRewriter : public Rewriter {
public:
    explicit SyntheticRewriter(SubstitutionTable table) : table_(std::move(table)) {}

    std::string rewrite(const RewriteRequest& request,
                        std::span<const RewriteDirective> directives,
                        std::uint64_t attempt_seed) override {
        return synthetic_rewrite(request.source_text, directives, table_, attempt_seed);
    }

    const SubstitutionTable& table() const { return table_; }

private:
    SubstitutionTable table_;
};

/// Returns the source text verbatim. Useful to exercise plumbing.
class EchoRewriter : public Rewriter {
public:
    std::string rewrite(const RewriteRequest& request, std::span<const RewriteDirective>,
                        std::uint64_t) override {
        return request.source_text;
    }
};

/// HTTP client for an external rewriting service.
/// Wire format: POST {"prompt", "source", "max_tokens", "temperature", "id"}
/// -> {"text", "id"}. Retries 5xx and transport errors with exponential
/// backoff; 4xx responses are configuration errors and are not retried.
class HttpRewriter : public Rewriter {
public:
    explicit HttpRewriter(BackendConfig config);

    std::string rewrite(const RewriteRequest& request, std::span<const RewriteDirective>,
                        std::uint64_t) override;

    struct CallStats {
        std::string text;
        int attempts = 0;
    };

    /// Same as rewrite() but also reports how many HTTP attempts were made.
    CallStats rewrite_with_stats(const RewriteRequest& request);

    const BackendConfig& config() const { return config_; }

private:
    BackendConfig config_;
    std::string host_;
    int port_ = 80;
    std::string path_;
};

}  // namespace c3tg
