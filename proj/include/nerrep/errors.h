#ifndef NERREP_ERRORS_H_
#define NERREP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace nerrep {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Malformed input file. line() is 1-based; 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace nerrep

#endif  // NERREP_ERRORS_H_
