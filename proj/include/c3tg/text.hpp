// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace c3tg {

/// Lowercases ASCII letters, replaces punctuation with spaces and splits on
/// whitespace. All scorers and metrics share this tokenizer so that term
/// counts agree across the pipeline.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a digest of raw bytes, as 16 lowercase hex chars.
std::string fnv1a_hex(std::string_view bytes);

/// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string format_double(double value);

/// Splits text into sentences on '.', '!' and '?'. Trailing text without a
/// terminator forms a final sentence. Terminators stay attached.
std::vector<std::string> split_sentences(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace c3tg
