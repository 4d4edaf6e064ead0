#pragma once

#include <stdexcept>
#include <string>

namespace wetcluster {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a documented precondition (bad arc, open chain, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A well-formed instance that cannot be realized (delta too large, masses
// exceeding the disk, wet pieces colliding, no feasible topology).
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Malformed serialized document; carries the offending location.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::string where)
      : Error(what + (where.empty() ? "" : " (at " + where + ")")),
        where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace wetcluster
