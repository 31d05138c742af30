#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace harmone {

// Base of every error raised by the library. CLI maps these onto exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::string field, const std::string& why = "out of range")
      : Error("invalid field '" + field + "': " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NegativeFlowError : public ParseError {
 public:
  explicit NegativeFlowError(std::size_t line) : ParseError("negative flow value", line) {}
};

#define HARMONE_SIMPLE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

HARMONE_SIMPLE_ERROR(OrderError);
HARMONE_SIMPLE_ERROR(BinMismatchError);
HARMONE_SIMPLE_ERROR(TooShortError);
HARMONE_SIMPLE_ERROR(EmptyTrainingSetError);
HARMONE_SIMPLE_ERROR(NumericalError);
HARMONE_SIMPLE_ERROR(NonFiniteError);
HARMONE_SIMPLE_ERROR(DegenerateError);
HARMONE_SIMPLE_ERROR(NoAlternativeError);
HARMONE_SIMPLE_ERROR(InsufficientDataError);
HARMONE_SIMPLE_ERROR(UnknownModelError);
HARMONE_SIMPLE_ERROR(UnknownVersionError);
HARMONE_SIMPLE_ERROR(SegmentError);

#undef HARMONE_SIMPLE_ERROR

}  // namespace harmone
