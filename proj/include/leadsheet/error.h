#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace leadsheet {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data is unusable (bad file, bad JSON, unsupported content).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnusableSourceError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedChordError : public DataError {
 public:
  using DataError::DataError;
};

// Token stream does not follow the decoder grammar.
class GrammarError : public DataError {
 public:
  GrammarError(const std::string& what, std::size_t index)
      : DataError(what + " at token " + std::to_string(index)), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class CapacityError : public DataError {
 public:
  CapacityError(const std::string& what, std::size_t bar)
      : DataError(what), bar_(bar) {}
  std::size_t bar() const { return bar_; }

 private:
  std::size_t bar_;
};

// Training produced a non-finite loss or gradient.
class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

// Sampling hit the length limit before the last bar was closed. Carries the
// decoder tokens produced so far.
class IncompleteGenerationError : public Error {
 public:
  IncompleteGenerationError(const std::string& what, std::vector<int> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<int>& partial() const { return partial_; }

 private:
  std::vector<int> partial_;
};

// Caller broke a precondition (bad argument, out-of-range value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace leadsheet
