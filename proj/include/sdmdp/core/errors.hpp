#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdmdp {

/// Malformed instance, distribution or configuration.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dynamic program exceeded its reachable-state budget.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t reachable)
      : std::runtime_error(what), reachable_(reachable) {}
  std::size_t reachable() const noexcept { return reachable_; }

 private:
  std::size_t reachable_;
};

/// Environment used out of order (stepping a finished episode, etc).
class EpisodeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A conditional probability was requested at a point with zero mass.
class UnreachableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sdmdp
