#pragma once

#include <stdexcept>
#include <string>

namespace atcd {

// Data or schema problems in user-supplied inputs (datasets, checkpoints).
// CLI maps these to exit code 2.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad thresholds, unknown factor names, ...).
// CLI maps these to exit code 2 as well.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: non-finite values in forward/backward passes,
// diverged training. CLI maps these to exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace atcd
