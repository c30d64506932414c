#pragma once

#include <stdexcept>

namespace trilayer {

// Configuration problems: bad config files, missing paths, invalid
// parameters. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Data problems: malformed records, vocabulary misses, degenerate inputs.
// The CLI maps these to exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trilayer
