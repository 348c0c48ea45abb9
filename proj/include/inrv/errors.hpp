#pragma once

#include <stdexcept>
#include <string>

namespace inrv {

// Shape/geometry violations (mismatched dims, invalid kernel sizes, ...).
class dim_error : public std::runtime_error {
 public:
  explicit dim_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, diverged training, invalid math arguments.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File I/O failures.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent on-disk data (headers, containers, sidecars).
class format_error : public std::runtime_error {
 public:
  explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace inrv
