#pragma once
#include <stdexcept>
#include <string>

namespace shgcn {

// Invalid or inconsistent input data (malformed files, out-of-range ids,
// duplicate records). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated API contract: shape mismatch, bad id, bad call order. These
// signal a caller bug, not bad user input.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Numeric breakdown (non-finite values where finite ones are required).
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shgcn
