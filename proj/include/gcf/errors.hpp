#pragma once

#include <stdexcept>
#include <string>

namespace gcf {

enum class ErrorCode {
    UnsupportedDimension,
    ResolutionTooSmall,
    GridMismatch,
    NotConvex,
    OrderingViolated,
    NotPositive,
    InvalidProfile,
    NegativeTime,
    InvalidParameter,
    ScalarSolveFailed,
    NotConvexAfterStep,
    ObstacleInvalid,
    DegenerateObstacle,
    OutOfPatch,
    NotGraphable,
    InsufficientSnapshots,
    EmptySet,
    NotGraphLike,
    DegenerateProfile,
    SolverStalled,
    ParseError,
    ValidationError,
    IoError,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the library; `node`/`time` locate the offending
// sample when a numeric contract is violated (-1 / NaN when not applicable).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, long node = -1, double time = 0.0)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          node_(node),
          time_(time) {}

    ErrorCode code() const { return code_; }
    long node() const { return node_; }
    double time() const { return time_; }

private:
    ErrorCode code_;
    long node_;
    double time_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
        case ErrorCode::ResolutionTooSmall: return "ResolutionTooSmall";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::NotConvex: return "NotConvex";
        case ErrorCode::OrderingViolated: return "OrderingViolated";
        case ErrorCode::NotPositive: return "NotPositive";
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::ScalarSolveFailed: return "ScalarSolveFailed";
        case ErrorCode::NotConvexAfterStep: return "NotConvexAfterStep";
        case ErrorCode::ObstacleInvalid: return "ObstacleInvalid";
        case ErrorCode::DegenerateObstacle: return "DegenerateObstacle";
        case ErrorCode::OutOfPatch: return "OutOfPatch";
        case ErrorCode::NotGraphable: return "NotGraphable";
        case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
        case ErrorCode::EmptySet: return "EmptySet";
        case ErrorCode::NotGraphLike: return "NotGraphLike";
        case ErrorCode::DegenerateProfile: return "DegenerateProfile";
        case ErrorCode::SolverStalled: return "SolverStalled";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace gcf
