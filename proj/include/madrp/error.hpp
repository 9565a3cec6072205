#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace madrp {

/// Invalid caller input: bad dimensions, violated preconditions, malformed data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input error tied to one cell of a tabular input (0-based row and column).
class CellError : public InputError {
 public:
  CellError(const std::string& what, std::size_t row, std::size_t column)
      : InputError(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace madrp
