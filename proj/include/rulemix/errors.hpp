#pragma once

#include <stdexcept>
#include <string>

namespace rulemix {

/// Bad configuration, bad CLI usage, unusable input files. Exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A pipeline stage failed on otherwise valid configuration. Exit code 3.
class PipelineError : public std::runtime_error {
public:
    explicit PipelineError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rulemix
