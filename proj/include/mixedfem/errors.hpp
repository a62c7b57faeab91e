#pragma once

#include <stdexcept>
#include <string>

namespace mixedfem {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// mesh
struct DegenerateTriangle : Error { using Error::Error; };
struct NonConformingInput : Error { using Error::Error; };
struct InterfaceViolation : Error { using Error::Error; };

// elements
struct UnsupportedDegree : Error { using Error::Error; };
struct UnsupportedOrder : Error { using Error::Error; };

// coefficients
struct NonPositiveCoefficient : Error { using Error::Error; };
struct MissingSubdomain : Error { using Error::Error; };

// assembly / solver
struct UnstablePair : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// postprocess
struct LocalSingularSystem : Error { using Error::Error; };

// analysis
struct EigenSolveFailure : Error { using Error::Error; };

// problems
struct UnknownProblem : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct RootFindFailure : Error { using Error::Error; };

// cli / study
struct NonPositiveError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace mixedfem
