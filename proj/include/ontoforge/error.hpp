#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ontoforge {

/// Broad failure classes. Each maps onto one CLI exit code.
enum class ErrorKind {
  usage,               // bad flags, bad configuration, unmet preconditions
  input_format,        // malformed ontology / KG / label / fixture files
  backend,             // model backend failures (HTTP, replay, scripted)
  incomplete_curation, // export or metrics requested before every candidate was decided
};

int exit_code_for(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Syntax or schema error in a line-oriented input document.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorKind::input_format, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error(ErrorKind::usage, message) {}
};

class CurationError : public Error {
 public:
  explicit CurationError(const std::string& message)
      : Error(ErrorKind::incomplete_curation, message) {}
};

}  // namespace ontoforge
