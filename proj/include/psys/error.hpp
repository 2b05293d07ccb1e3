#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace psys {

// 1-based position of a token inside an input text.
struct SourceSpan {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class ValidateErrorKind {
  UnknownSymbol,
  UnknownLabel,
  DuplicateLabel,
  NotShallow,
  BadBound,
  DivideOnSkin,
};

// Structural validation failure; names the offending element and, when the
// element is a rule, its ordinal so front ends can map it back to a line.
class ValidateError : public Error {
 public:
  ValidateError(ValidateErrorKind kind, std::string element, const std::string& what,
                std::optional<std::size_t> rule_ordinal = std::nullopt,
                std::optional<SourceSpan> span = std::nullopt)
      : Error(what),
        kind_(kind),
        element_(std::move(element)),
        rule_ordinal_(rule_ordinal),
        span_(span) {}

  ValidateErrorKind kind() const { return kind_; }
  const std::string& element() const { return element_; }
  std::optional<std::size_t> rule_ordinal() const { return rule_ordinal_; }
  std::optional<SourceSpan> span() const { return span_; }

 private:
  ValidateErrorKind kind_;
  std::string element_;
  std::optional<std::size_t> rule_ordinal_;
  std::optional<SourceSpan> span_;
};

class ParseError : public Error {
 public:
  ParseError(SourceSpan span, std::string expected, const std::string& what)
      : Error(what), span_(span), expected_(std::move(expected)) {}
  SourceSpan span() const { return span_; }
  const std::string& expected() const { return expected_; }

 private:
  SourceSpan span_;
  std::string expected_;
};

enum class MultisetErrorKind { NegativeCount, Overflow, NegativeMultiplicity };

class MultisetError : public Error {
 public:
  MultisetError(MultisetErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  MultisetErrorKind kind() const { return kind_; }

 private:
  MultisetErrorKind kind_;
};

enum class ReplayErrorKind { Exhausted, OutOfRange };

class ReplayError : public Error {
 public:
  ReplayError(ReplayErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  ReplayErrorKind kind() const { return kind_; }

 private:
  ReplayErrorKind kind_;
};

class BudgetExceededError : public Error {
 public:
  explicit BudgetExceededError(const std::string& what) : Error(what) {}
};

}  // namespace psys
