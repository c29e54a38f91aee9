// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#include "c3tg/text.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace c3tg {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            current.push_back(static_cast<char>(std::tolower(ch)));
        } else if (ch >= 0x80) {
            // Non-ASCII bytes pass through untouched; multi-byte sequences
            // stay contiguous inside one token.
            current.push_back(static_cast<char>(ch));
        } else if (ch == '\'') {
            // keep contractions as one token ("don't" -> "dont")
        } else {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::string current;
    for (char ch : text) {
        current.push_back(ch);
        if (ch == '.' || ch == '!' || ch == '?') {
            sentences.push_back(std::move(current));
            current.clear();
        }
    }
    // skip all-whitespace tails
    bool has_content = false;
    for (char ch : current) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            has_content = true;
            break;
        }
    }
    if (has_content) sentences.push_back(std::move(current));
    return sentences;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace c3tg
