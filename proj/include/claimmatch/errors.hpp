#pragma once

#include <stdexcept>
#include <string>

namespace claimmatch {

// Base for all library errors. `exit_code` groups errors the way the CLI
// reports them: 2 for data problems, 3 for numerical failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 2)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

struct IoError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct EmptySplitError : Error {
  using Error::Error;
};
struct EmptyIndexError : Error {
  using Error::Error;
};
struct UnknownDocError : Error {
  using Error::Error;
};
struct UnknownQueryError : Error {
  using Error::Error;
};
struct MissingScorerError : Error {
  using Error::Error;
};
struct DegenerateDataError : Error {
  using Error::Error;
};
struct LayoutMismatchError : Error {
  using Error::Error;
};
struct EmptyInputError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(what, 3) {}
};

}  // namespace claimmatch
