#pragma once

// Flat "key = value" study configuration files. '#' starts a comment and
// unknown keys are rejected.

#include <string>
#include <string_view>
#include <vector>

#include "itemcal/harness.hpp"

namespace itemcal {

/// Applies one setting. Throws Error(Config) for unknown keys or bad values.
void apply_setting(StudyConfig& cfg, std::string_view key, std::string_view value);

StudyConfig parse_study_config(std::string_view text, const std::string& origin = "<string>");
StudyConfig load_study_config(const std::string& path);

/// Canonical text form; parse_study_config(format_study_config(c)) == c.
std::string format_study_config(const StudyConfig& cfg);

std::vector<std::string> known_config_keys();

}  // namespace itemcal
