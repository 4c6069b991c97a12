#pragma once

#include <stdexcept>
#include <string>

namespace gridgame {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document; `path` is a JSON-pointer-like location.
class ParseError : public Error {
public:
  ParseError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Well-formed input that violates a cross-reference or invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Raised when the attacker has no traversable route to anything useful.
class NonTraversable : public Error {
public:
  using Error::Error;
};

}  // namespace gridgame
