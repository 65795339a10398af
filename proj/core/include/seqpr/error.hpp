#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace seqpr {

/// Raised for any contract violation on inputs or configuration.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while decoding a file. Carries the offending record (scan, row or
/// line, depending on the format) when one can be identified.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::optional<std::size_t> record = std::nullopt)
      : std::runtime_error(what), record_(record) {}

  std::optional<std::size_t> record() const { return record_; }

 private:
  std::optional<std::size_t> record_;
};

}  // namespace seqpr
