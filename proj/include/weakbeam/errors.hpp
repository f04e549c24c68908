#pragma once

#include <stdexcept>
#include <string>

namespace weakbeam {

// Error families map 1:1 onto CLI exit codes (see cli.hpp).
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_number(line) {}
  int line_number;
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised by analysis stages; carries the stage name so the CLI can report
// where a pipeline failed.
struct PipelineError : std::runtime_error {
  PipelineError(const std::string& stage_name, const std::string& what)
      : std::runtime_error(stage_name + ": " + what), stage(stage_name) {}
  std::string stage;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace weakbeam
