#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cgr {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownNodeError : public Error {
 public:
  using Error::Error;
};

class CycleError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class SelfMutexError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class InhibitedError : public Error {
 public:
  using Error::Error;
};

class NotGenerativeError : public Error {
 public:
  using Error::Error;
};

class NoFitError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class UnderflowError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  ConflictError(std::uint32_t node, const std::string& what) : Error(what), node_(node) {}

  // Raw id of the Active node that propagation tried to inhibit.
  std::uint32_t node() const noexcept { return node_; }

 private:
  std::uint32_t node_;
};

class InvalidEnvError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgr
