#ifndef PACRIT_TYPES_HPP
#define PACRIT_TYPES_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pacrit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Points and small matrices are fixed 2D; 1D problems use the x component
// and leave y at zero.
using Point = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

using Index = Eigen::Index;

/// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad input: configuration, expressions, violated preconditions.
struct ValidationError : Error {
  using Error::Error;
};

/// Expression text that does not conform to the grammar.
struct ParseError : ValidationError {
  ParseError(const std::string& what, std::size_t pos)
      : ValidationError(what + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};

/// A solver or analysis failed at runtime (non-convergence, detected
/// supercritical domain, inconsistent sequences, ...).
struct AnalysisError : Error {
  using Error::Error;
};

}  // namespace pacrit

#endif
