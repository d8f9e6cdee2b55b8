#pragma once

#include <stdexcept>
#include <string>

namespace srnn {

// Incompatible operand shapes while building a graph node.
class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or inconsistent input data (corpus lines, gold annotations).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced too many consecutive non-finite losses.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace srnn
