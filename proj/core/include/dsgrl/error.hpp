#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dsgrl {

// Base of every error the engine raises. `category()` is the stable token
// the CLI prints as `ERROR <category>: <detail>`.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape", w) {}
};

struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error("range", w) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error("parse", w) {}
};

struct ConsistencyError : Error {
  explicit ConsistencyError(const std::string& w) : Error("consistency", w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};

struct LifecycleError : Error {
  explicit LifecycleError(const std::string& w) : Error("lifecycle", w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error("numeric", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};

// Malformed binary containers (bad magic, version, truncation).
struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error("format", w) {}
};

// Violations of the evaluation protocol (e.g. a class missing from train).
struct ProtocolError : Error {
  explicit ProtocolError(const std::string& w) : Error("protocol", w) {}
};

// Degenerate inputs: single-row batches, zero rows that cannot be normalized.
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& w) : Error("degenerate", w) {}
};

}  // namespace dsgrl
