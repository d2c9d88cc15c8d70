#pragma once

#include <stdexcept>
#include <string>

namespace multisom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. The message names the line or byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A stage of the workspace pipeline failed; `stage()` names it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace multisom
