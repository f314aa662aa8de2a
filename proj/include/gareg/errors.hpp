#pragma once

#include <stdexcept>
#include <string>

namespace gareg {

// Exit codes used by the CLI. Library errors carry the category so the
// frontend can map any failure to a stable process exit code.
enum class ErrorCode : int {
    Usage = 2,
    Io = 3,
    Parse = 4,
    Degenerate = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

struct EmptyCloudError : Error {
    explicit EmptyCloudError(const std::string& what = "empty point cloud")
        : Error(ErrorCode::Degenerate, what) {}
};

struct DegenerateCloudError : Error {
    explicit DegenerateCloudError(const std::string& what)
        : Error(ErrorCode::Degenerate, what) {}
};

struct EmptyPopulationError : Error {
    explicit EmptyPopulationError(const std::string& what = "empty population")
        : Error(ErrorCode::Degenerate, what) {}
};

struct TooFewPairsError : Error {
    explicit TooFewPairsError(const std::string& what)
        : Error(ErrorCode::Degenerate, what) {}
};

struct DegenerateConfigurationError : Error {
    explicit DegenerateConfigurationError(const std::string& what)
        : Error(ErrorCode::Degenerate, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorCode::Parse, what) {}
};

struct NonFiniteCoordinateError : Error {
    explicit NonFiniteCoordinateError(const std::string& what)
        : Error(ErrorCode::Parse, what) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& what) : Error(ErrorCode::Internal, what) {}
};

}  // namespace gareg
