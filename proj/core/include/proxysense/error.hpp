#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace proxysense {

// Base for every error the library raises. Errors raised while reading a
// line-record file carry the 1-based line number of the offending record.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + what : what),
        line_(line) {}

  std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

// Label identifier not present in the configured inventory.
class InventoryError : public Error {
 public:
  InventoryError(const std::string& identifier, std::optional<std::size_t> line = std::nullopt)
      : Error("unknown supersense '" + identifier + "'", line), identifier_(identifier) {}

  const std::string& identifier() const { return identifier_; }

 private:
  std::string identifier_;
};

class FormatError : public Error {
  using Error::Error;
};

class ValidationError : public Error {
  using Error::Error;
};

// Argument outside an operation's mathematical domain (e.g. a zero vector).
class DomainError : public Error {
  using Error::Error;
};

// Substitute contains the target preposition as a standalone word.
class ContainmentError : public ValidationError {
 public:
  ContainmentError(const std::string& substitute, const std::string& lemma)
      : ValidationError("substitute '" + substitute + "' contains the target '" + lemma + "'") {}
};

// No centroid exists for the requested preposition.
class CoverageError : public Error {
  using Error::Error;
};

class ConfigError : public Error {
  using Error::Error;
};

// Vector provider failed while predicting one jackknife split.
class ProviderError : public Error {
 public:
  ProviderError(std::size_t split, const std::string& cause)
      : Error("vector provider failed on split " + std::to_string(split) + ": " + cause),
        split_(split) {}

  std::size_t split() const { return split_; }

 private:
  std::size_t split_;
};

// Unknown worker or bad credentials.
class AuthError : public Error {
  using Error::Error;
};

// Event log is not replayable (sequence gap, unknown event type, ...).
class CorruptionError : public Error {
  using Error::Error;
};

}  // namespace proxysense
