#pragma once

#include <stdexcept>
#include <string>

namespace mn2v {

// Exit codes used by the command line driver.
enum class ErrorKind : int {
  input = 2,
  numeric = 3,
  resource = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct ResourceError : Error {
  explicit ResourceError(const std::string& what) : Error(ErrorKind::resource, what) {}
};

}  // namespace mn2v
