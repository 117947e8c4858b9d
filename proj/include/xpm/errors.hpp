#pragma once

#include <stdexcept>
#include <string>

namespace xpm {

// Every error raised by the library derives from Error so callers (the harness
// in particular) can record a failure per sweep point and keep going.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
    using Error::Error;
};

// Input lies outside the region where a closed form is meaningful.
struct DomainError : Error {
    using Error::Error;
};

struct SolverError : Error {
    SolverError(const std::string& what, double condition_estimate)
        : Error(what), condition(condition_estimate) {}
    double condition;
};

struct StiffnessError : Error {
    using Error::Error;
};

struct AccuracyError : Error {
    using Error::Error;
};

struct SamplingError : Error {
    using Error::Error;
};

struct ResolutionError : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct CalibrationError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct FlatTraceError : Error {
    using Error::Error;
};

struct FitNotConverged : Error {
    using Error::Error;
};

}  // namespace xpm
