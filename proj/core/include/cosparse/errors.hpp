#pragma once

#include <stdexcept>
#include <string>

namespace cosparse {

/// Coarse classification used by the command-line tool to pick an exit code.
enum class ErrorClass { validation, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define COSPARSE_DEFINE_ERROR(Name, Class)                                         \
  class Name : public Error {                                                      \
   public:                                                                         \
    explicit Name(const std::string& what) : Error(ErrorClass::Class, #Name ": " + what) {} \
  };

// Input/contract violations.
COSPARSE_DEFINE_ERROR(DimensionMismatch, validation)
COSPARSE_DEFINE_ERROR(InvalidArgument, validation)
COSPARSE_DEFINE_ERROR(DegenerateColumn, validation)
COSPARSE_DEFINE_ERROR(CoincidentRows, validation)
COSPARSE_DEFINE_ERROR(InsufficientSamples, validation)
COSPARSE_DEFINE_ERROR(TooSmall, validation)
COSPARSE_DEFINE_ERROR(ConfigError, validation)

// Numerical breakdowns.
COSPARSE_DEFINE_ERROR(ZeroDenominator, numerical)
COSPARSE_DEFINE_ERROR(LineSearchFailure, numerical)
COSPARSE_DEFINE_ERROR(RankDeficient, numerical)
COSPARSE_DEFINE_ERROR(NonFiniteObjective, numerical)
COSPARSE_DEFINE_ERROR(NonFiniteGradient, numerical)

#undef COSPARSE_DEFINE_ERROR

/// Parse failure while reading an image, operator or transform file.
class MalformedFile : public Error {
 public:
  MalformedFile(const std::string& what, std::size_t offset)
      : Error(ErrorClass::io, "MalformedFile: " + what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace cosparse
