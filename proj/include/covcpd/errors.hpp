#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covcpd {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed a value outside the documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Least-squares projection onto the basis is not identifiable.
class IllPosedProjection : public Error {
 public:
  using Error::Error;
};

// A curve with zero norm where a normalisation was requested.
class DegenerateCurve : public Error {
 public:
  DegenerateCurve(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class BasisError : public Error {
 public:
  using Error::Error;
};

class SegmentTooShort : public Error {
 public:
  using Error::Error;
};

// Malformed input file (ragged rows, unparsable tokens, bad JSON shape).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input carrying unusable values. Row and column are 1-based.
class DataError : public Error {
 public:
  DataError(std::size_t row, std::size_t col, const std::string& what)
      : Error(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace covcpd
