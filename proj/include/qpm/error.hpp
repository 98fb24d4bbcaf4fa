#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpm {

enum class ErrorKind {
    NonMonotone,
    Discontinuous,
    PoleProximity,
    InvalidFrequency,
    NearRational,
    RangeViolation,
    NotSelfAdjoint,
    FrameMismatch,
    DegenerateDiagonal,
    BranchAmbiguity,
    GapTooSmall,
    GapCollapse,
    SignFlip,
    HypothesisViolation,
    AssignmentAmbiguity,
    NormTooSmall,
    DegenerateFrame,
    Gen2Violation,
    Gen3Violation,
    Gen4Violation,
    SeparationViolation,
    CovarianceMismatch,
    ConfigInfeasible,
    BoxTooSmall,
    PeakNotFound,
    ManifestError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI)
// can name the violated invariant without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qpm
