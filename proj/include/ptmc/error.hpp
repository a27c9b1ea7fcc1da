#pragma once

#include <stdexcept>
#include <string>

namespace ptmc {

/// Invalid run or sweep parameters. The message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Statistic requested over data that cannot support it (empty window, too few points).
class AnalysisError : public std::domain_error {
public:
    explicit AnalysisError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace ptmc
