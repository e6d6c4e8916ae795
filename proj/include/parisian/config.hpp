#pragma once

#include "parisian/study.hpp"

#include <map>
#include <string>

namespace parisian {

/// Flat key → value view of a configuration. Nested JSON objects become
/// dotted keys ("kou.lambda"); arrays become comma-separated lists.
using ConfigMap = std::map<std::string, std::string>;

/// Reads `key = value` lines (`#` starts a comment) or, when the first
/// non-blank character is `{`, a JSON object.
ConfigMap read_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);

/// Overwrites the fields named in `cfg`; unknown keys throw
/// std::invalid_argument so typos do not go unnoticed.
void apply_config(const ConfigMap& cfg, StudyConfig& study);

/// Known keys with a one-line description, for --help output.
std::string config_keys_help();

}  // namespace parisian
