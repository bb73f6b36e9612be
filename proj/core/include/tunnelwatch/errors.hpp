#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tw {

/// Base class for all tunnelwatch errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DegenerateBox : public Error {
public:
  explicit DegenerateBox(const std::string& what) : Error(what) {}
};

class DegenerateQuad : public Error {
public:
  explicit DegenerateQuad(const std::string& what) : Error(what) {}
};

class PointAtInfinity : public Error {
public:
  explicit PointAtInfinity(const std::string& what) : Error(what) {}
};

class NonPositiveShape : public Error {
public:
  explicit NonPositiveShape(const std::string& what) : Error(what) {}
};

class SingularInnovation : public Error {
public:
  explicit SingularInnovation(const std::string& what) : Error(what) {}
};

class NonMonotonicTime : public Error {
public:
  explicit NonMonotonicTime(const std::string& what) : Error(what) {}
};

class NonMonotonicFrame : public Error {
public:
  explicit NonMonotonicFrame(const std::string& what) : Error(what) {}
};

class InvalidInterval : public Error {
public:
  explicit InvalidInterval(const std::string& what) : Error(what) {}
};

class InvalidScenario : public Error {
public:
  explicit InvalidScenario(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Malformed record in a line-delimited input; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(std::uint64_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  std::uint64_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

private:
  std::uint64_t line_;
  std::string reason_;
};

}  // namespace tw
