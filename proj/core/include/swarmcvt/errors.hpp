#pragma once

#include <stdexcept>
#include <string>

namespace swarmcvt {

/// Bad user input: malformed scenario, out-of-range parameter, invalid polygon.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Planning or tessellation cannot satisfy its constraints.
class InfeasibleError : public std::runtime_error {
public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside an iterative solver.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swarmcvt
