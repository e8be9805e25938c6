#pragma once

#include "evtrack/discretize.hpp"

#include <stdexcept>
#include <string>

namespace evtrack {

/// Malformed config text (missing key, bad array literal, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Loads a model from a flat key/value file:
///   dim = 2
///   A = [-0.0145 -0.0886  0.0886 0]      # row-major
///   B = [...]
///   Sigma0 = [...]
/// '#' starts a comment; commas and whitespace both separate entries.
/// Model invariants (Hurwitz A, PD noise and initial covariance) are
/// checked at load and reported with the offending field name.
StateSpaceModel load_model(const std::string& path);

StateSpaceModel parse_model(const std::string& text);

}  // namespace evtrack
