#pragma once

#include <stdexcept>
#include <string>

namespace tbm {

/// A clustering step left a cluster without members.
class EmptyClusterError : public std::runtime_error {
 public:
  explicit EmptyClusterError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data could not be read or is unusable.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tbm
