#pragma once

#include <stdexcept>
#include <string>

namespace lyricalign {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  invalid_input,  // malformed files, bad arguments, shape mismatches
  no_voice,       // VAD retained nothing
  empty_vowels,   // lyrics produced no vowel units
  numerical,      // NaN/Inf or a solver that cannot proceed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return 2;
    case ErrorKind::no_voice:
    case ErrorKind::empty_vowels: return 3;
    case ErrorKind::numerical: return 4;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::invalid_input, what);
}

}  // namespace lyricalign
