#pragma once

#include <stdexcept>
#include <string>

namespace depprobe {

/// Base of every error thrown by the toolkit. The CLI maps each subclass to
/// a distinct process exit code (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class VocabError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  AlignmentError(const std::string& what, std::size_t index)
      : Error("sentence " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Correlation or similarity is undefined for the given input
/// (constant series, |r| = 1, empty common support).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

namespace exit_codes {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kArgument = 2;
inline constexpr int kIo = 3;
inline constexpr int kFormat = 4;
inline constexpr int kAlignment = 5;
inline constexpr int kNumeric = 6;
inline constexpr int kInternal = 70;
}  // namespace exit_codes

int exit_code(const Error& error);

}  // namespace depprobe
