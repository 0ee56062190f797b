#pragma once

#include <stdexcept>
#include <string>

namespace hopcalc {

// Pole proximity, non-convergent series, domain overflow and the like.
// Contract violations (bad arguments) throw std::invalid_argument instead.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hopcalc
