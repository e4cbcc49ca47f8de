#pragma once

#include <stdexcept>
#include <string>

namespace sqan {

// Error families map 1:1 onto the CLI exit codes (see tools/sqan.cpp):
// config_error -> 2, physics_error -> 3, io_error -> 4.

struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct physics_error : std::runtime_error {
  explicit physics_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sqan
