/**
 * @file config.hpp
 * @brief Sectioned key = value run configuration.
 *
 * Lines are `[section]`, `key = value`, blank, or comments starting with
 * `#` or `;`. Unknown sections and keys are rejected. Observation times are
 * given by `times` (explicit list), `count` (inclusive linspace over
 * [t_start, t_end]) or `interval` (t_start + k interval up to t_end).
 */
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kinobs/assimilation.hpp"

namespace kinobs {

/// Malformed or invalid configuration; line() is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct ParsedConfig {
    RunConfig run;
    std::optional<std::string> csv;  ///< [output] csv
};

ParsedConfig parse_config_text(std::string_view text);
/// Throws ConfigError, including for unreadable files.
ParsedConfig parse_config(const std::filesystem::path& path);

/// Fully resolved configuration in the same format; parsing it again yields
/// an identical RunConfig.
std::string echo_config(const RunConfig& cfg);

}  // namespace kinobs
