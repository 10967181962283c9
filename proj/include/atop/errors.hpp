#pragma once

#include <stdexcept>
#include <string>

namespace atop {

/// Base class for everything the library throws on purpose. The what()
/// string always starts with the error name so CLI users and tests can
/// match on it.
struct Error : std::runtime_error {
    explicit Error(const std::string& name, const std::string& detail)
        : std::runtime_error(detail.empty() ? name : name + ": " + detail) {}
};

// -- configuration / input errors (CLI exit code 1) --

struct ParseError : Error {
    ParseError(int line, const std::string& reason)
        : Error("ParseError", "line " + std::to_string(line) + ": " + reason), line(line) {}
    int line;
};

struct ValidationError : Error {
    ValidationError(const std::string& key, const std::string& constraint)
        : Error("ValidationError", key + " must be " + constraint), key(key) {}
    std::string key;
};

struct UnknownScenario : Error {
    explicit UnknownScenario(const std::string& name) : Error("UnknownScenario", name) {}
};

struct InvalidTagSegment : Error {
    explicit InvalidTagSegment(const std::string& detail) : Error("InvalidTagSegment", detail) {}
};

struct NonConvexUnsupported : Error {
    explicit NonConvexUnsupported(const std::string& op)
        : Error("NonConvexUnsupported", op + " requires a convex anisotropy") {}
};

// -- solver errors (CLI exit code 2) --

struct SubdifferentialNotSingleton : Error {
    explicit SubdifferentialNotSingleton(const std::string& detail)
        : Error("SubdifferentialNotSingleton", detail) {}
};

struct NoDirichletConstraint : Error {
    NoDirichletConstraint() : Error("NoDirichletConstraint", "state system has no Dirichlet-type boundary segment") {}
};

struct SolverDiverged : Error {
    explicit SolverDiverged(const std::string& detail) : Error("SolverDiverged", detail) {}
};

struct StepsizeTooLarge : Error {
    explicit StepsizeTooLarge(const std::string& detail) : Error("StepsizeTooLarge", detail) {}
};

struct SecantStalled : Error {
    explicit SecantStalled(const std::string& detail) : Error("SecantStalled", detail) {}
};

struct InnerNotConverged : Error {
    explicit InnerNotConverged(const std::string& detail) : Error("InnerNotConverged", detail) {}
};

struct NoInterface : Error {
    explicit NoInterface(const std::string& detail) : Error("NoInterface", detail) {}
};

struct IoError : Error {
    explicit IoError(const std::string& detail) : Error("IoError", detail) {}
};

}  // namespace atop
