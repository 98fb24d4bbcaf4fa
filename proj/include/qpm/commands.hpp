#pragma once

#include <string>
#include <vector>

#include "qpm/manifest.hpp"

namespace qpm {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::string out_dir;
    unsigned threads = 1;
    bool strict = false;
};

struct CheckLine {
    std::string name;
    bool passed = false;
    bool asserted = true;  // false: a warning, promoted to a failure under --strict
    std::string detail;
};

struct CommandResult {
    std::vector<CheckLine> checks;
    std::vector<std::string> files;

    // 0 when every asserted check passes (and every warning, under strict), 1 otherwise.
    int exit_code(bool strict) const;
    // First check that decides a non-zero exit, or nullptr.
    const CheckLine* first_failure(bool strict) const;
};

std::vector<std::string> command_names();

// Throws ManifestError for an unknown command; other errors propagate.
CommandResult run_command(const std::string& command, const Manifest& manifest, const RunOptions& options);

}  // namespace qpm
