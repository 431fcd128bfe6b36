#pragma once

#include <stdexcept>
#include <string>

namespace mrkf {

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidMask : std::runtime_error {
  explicit InvalidMask(const std::string& what) : std::runtime_error(what) {}
};

struct UndeclaredVariable : std::runtime_error {
  explicit UndeclaredVariable(const std::string& what) : std::runtime_error(what) {}
};

struct UnassignedVariable : std::runtime_error {
  explicit UnassignedVariable(const std::string& what) : std::runtime_error(what) {}
};

struct Unobservable : std::runtime_error {
  explicit Unobservable(const std::string& what) : std::runtime_error(what) {}
};

struct Infeasible : std::runtime_error {
  explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

struct Unstable : std::runtime_error {
  explicit Unstable(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigParseError : std::runtime_error {
  explicit ConfigParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrkf
