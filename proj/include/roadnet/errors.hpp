#pragma once
// Error taxonomy shared across the library and the CLI exit-code mapping.

#include <stdexcept>
#include <string>

namespace roadnet {

// bad run configuration (constraint violations, incompatible parameters)
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// malformed input text (config files, sample files)
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// filesystem failures
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace roadnet
