#include "qpm/error.hpp"

namespace qpm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NonMonotone: return "NonMonotone";
    case ErrorKind::Discontinuous: return "Discontinuous";
    case ErrorKind::PoleProximity: return "PoleProximity";
    case ErrorKind::InvalidFrequency: return "InvalidFrequency";
    case ErrorKind::NearRational: return "NearRational";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorKind::FrameMismatch: return "FrameMismatch";
    case ErrorKind::DegenerateDiagonal: return "DegenerateDiagonal";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::GapTooSmall: return "GapTooSmall";
    case ErrorKind::GapCollapse: return "GapCollapse";
    case ErrorKind::SignFlip: return "SignFlip";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::AssignmentAmbiguity: return "AssignmentAmbiguity";
    case ErrorKind::NormTooSmall: return "NormTooSmall";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::Gen2Violation: return "Gen2Violation";
    case ErrorKind::Gen3Violation: return "Gen3Violation";
    case ErrorKind::Gen4Violation: return "Gen4Violation";
    case ErrorKind::SeparationViolation: return "SeparationViolation";
    case ErrorKind::CovarianceMismatch: return "CovarianceMismatch";
    case ErrorKind::ConfigInfeasible: return "ConfigInfeasible";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::PeakNotFound: return "PeakNotFound";
    case ErrorKind::ManifestError: return "ManifestError";
    }
    return "Unknown";
}

}  // namespace qpm
