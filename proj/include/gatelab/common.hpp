#ifndef GATELAB_COMMON_HPP
#define GATELAB_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace gatelab {

inline constexpr const char* kVersion = "1.0.0";

using Vec = std::vector<double>;

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// map failures to exit code 1 (runtime) vs 2 (usage) uniformly.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

struct BudgetError : Error {
    explicit BudgetError(const std::string& msg) : Error(msg) {}
};

// Persistence / parsing failures.
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

struct VersionError : FormatError {
    explicit VersionError(const std::string& msg) : FormatError(msg) {}
};

struct ChecksumError : FormatError {
    explicit ChecksumError(const std::string& msg) : FormatError(msg) {}
};

struct ParseError : FormatError {
    explicit ParseError(const std::string& msg) : FormatError(msg) {}
};

// Operation invoked on a variant/state it is not defined for
// (e.g. gate derivatives of a hard-gated net, FRG gates for an
// unregistered input).
struct NotApplicableError : Error {
    explicit NotApplicableError(const std::string& msg) : Error(msg) {}
};

// Command-line misuse; the CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gatelab

#endif
