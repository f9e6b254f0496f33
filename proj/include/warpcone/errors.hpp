#pragma once

#include <stdexcept>
#include <string>

namespace warpcone {

/// Invalid argument or coordinate for the requested operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A configured size cap would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& cap, const std::string& what)
      : std::runtime_error(what + " (cap: " + cap + ")"), cap_(cap) {}
  const std::string& cap() const noexcept { return cap_; }

 private:
  std::string cap_;
};

/// A structure could not be built, e.g. a level graph came out disconnected.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Scenario configuration rejected; `field()` is a JSON-style path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace warpcone
