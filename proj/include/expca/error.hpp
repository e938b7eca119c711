#ifndef EXPCA_ERROR_HPP
#define EXPCA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace expca {

// Raised for every data, format and model-validation failure. The CLI maps
// it to exit code 1; usage problems are rejected by the flag parser with
// exit code 2 before any Error can be thrown.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string &msg) { throw Error(msg); }

}  // namespace expca

#endif
