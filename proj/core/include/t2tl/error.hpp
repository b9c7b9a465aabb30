// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace t2tl {

// Root of every exception thrown by the library.  The CLI maps subclasses to
// exit codes, so keep the hierarchy shallow.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LexError : public Error {
 public:
  LexError(std::size_t offset, const std::string& what)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& found)
      : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected +
              ", found " + found),
        offset_(offset),
        expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnknownProposition : public Error {
 public:
  explicit UnknownProposition(const std::string& name)
      : Error("unknown proposition '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class PositionOutOfRange : public Error {
 public:
  using Error::Error;
};
class ClosureExplosion : public Error {
 public:
  using Error::Error;
};
class TerminalRoot : public Error {
 public:
  using Error::Error;
};
class InvalidAction : public Error {
 public:
  using Error::Error;
};
class LayoutError : public Error {
 public:
  using Error::Error;
};
class SteppedTerminal : public Error {
 public:
  using Error::Error;
};
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};
class UnknownToken : public Error {
 public:
  using Error::Error;
};
class MissingCache : public Error {
 public:
  using Error::Error;
};
class EmptyBatch : public Error {
 public:
  using Error::Error;
};
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, const std::string& why)
      : Error("invalid config '" + field + "': " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};
class CheckpointMismatch : public Error {
 public:
  using Error::Error;
};
class StateSpaceTooLarge : public Error {
 public:
  using Error::Error;
};
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace t2tl
