// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace c3tg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller broke a documented precondition (mismatched vocabularies,
/// negative probabilities, length mismatches, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Bad or incomplete configuration (missing scorer, empty lexicon, ...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Not enough data to compute the requested statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// The requested fit has no unique solution (e.g. single-class labels).
class IllPosedError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given input (too few tokens, empty set).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Distribution fusion collapsed to an all-zero weight vector.
class DegenerateFusionError : public Error {
public:
    using Error::Error;
};

/// Input files / CLI arguments failed validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Rewriter backend failures, typed by cause.
class BackendError : public Error {
public:
    enum class Kind { timeout, service, protocol, configuration, empty_output };

    BackendError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

    const char* kind_name() const {
        switch (kind_) {
            case Kind::timeout: return "timeout";
            case Kind::service: return "service";
            case Kind::protocol: return "protocol";
            case Kind::configuration: return "configuration";
            case Kind::empty_output: return "empty_output";
        }
        return "unknown";
    }

private:
    Kind kind_;
};

}  // namespace c3tg
