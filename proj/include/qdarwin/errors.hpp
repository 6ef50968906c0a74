#pragma once

#include <stdexcept>
#include <string>

namespace qdarwin {

/// Malformed configuration or unparsable input (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problem size exceeds the configured dense/combinatorial envelope
/// (CLI exit code 4).
struct EnvelopeError : std::runtime_error {
  explicit EnvelopeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qdarwin
