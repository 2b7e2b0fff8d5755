#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapeline {

using invalid_argument = std::invalid_argument;

// Operation needs a nonempty input (e.g. nearest point of an empty set).
class empty_domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Geometric input is degenerate for the requested construction.
class degenerate_geometry_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A route query or a cutoff construction found more than one component.
class disconnected_graph_error : public std::runtime_error {
 public:
  disconnected_graph_error(const std::string& what, std::vector<std::size_t> component_sizes)
      : std::runtime_error(what), sizes_(std::move(component_sizes)) {}

  const std::vector<std::size_t>& component_sizes() const noexcept { return sizes_; }

 private:
  std::vector<std::size_t> sizes_;
};

// An exactly-checkable invariant failed; the message names the witness.
class property_violation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shapeline
