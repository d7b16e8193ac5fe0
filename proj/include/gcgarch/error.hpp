#pragma once

#include <stdexcept>
#include <string>

namespace gcg {

// Error carrying a coarse category so the C API can map it to a status code.
class Error : public std::runtime_error {
 public:
  enum class Code { invalid_argument, io, parse, numeric, unsupported };
  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

}  // namespace gcg
