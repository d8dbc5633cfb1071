#ifndef CIRCMIX_ERRORS_HPP
#define CIRCMIX_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace circmix {

/// Parameter or argument outside its admissible range.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input carries no usable information (e.g. all weights zero).
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input file content that cannot be used: missing columns, bad numbers, no rows.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::ptrdiff_t row = -1)
      : std::runtime_error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what),
        row_(row) {}
  std::ptrdiff_t row() const noexcept { return row_; }

 private:
  std::ptrdiff_t row_;
};

/// A mixture component lost all of its responsibility mass.
class ComponentCollapseError : public std::runtime_error {
 public:
  ComponentCollapseError(std::size_t component, double mass)
      : std::runtime_error("component " + std::to_string(component + 1) +
                           " collapsed (responsibility mass " + std::to_string(mass) + ")"),
        component_(component) {}
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

/// Every EM restart failed.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace circmix

#endif  // CIRCMIX_ERRORS_HPP
