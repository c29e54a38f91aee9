// Copyright (c) 2026 C3TG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

namespace c3tg {

enum class AdjustDirection { increase, decrease, maintain };
enum class AdjustIntensity { slight, significant };

const char* to_string(AdjustDirection direction);
const char* to_string(AdjustIntensity intensity);

/// One dimensional adjustment instruction for the rewriter. `maintain`
/// directives carry no intensity.
struct RewriteDirective {
    std::string dim;
    AdjustDirection direction = AdjustDirection::maintain;
    std::optional<AdjustIntensity> intensity;

    bool operator==(const RewriteDirective&) const = default;
};

/// Human-readable dimension name for prompts: the last dot-separated id
/// segment, first letter uppercased ("emotion.joy" -> "Joy").
std::string display_name(const std::string& attribute_id);

}  // namespace c3tg
