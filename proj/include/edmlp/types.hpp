#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edmlp {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto distinct exit statuses.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (manifests, images, case sets).
class DataError : public Error {
public:
  using Error::Error;
};

/// File system failures: missing files, unreadable or unwritable paths.
class IoError : public Error {
public:
  using Error::Error;
};

/// Shape or dimension mismatch against a model structure.
class DimensionError : public Error {
public:
  using Error::Error;
};

class TrainingError : public Error {
public:
  using Error::Error;
};

class MetricError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// omega_1 is the positive class.
enum class Label : std::uint8_t { Dysplastic, NonDysplastic };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

// Clockwise quarter turns applied to a cutout.
enum class Rotation : std::uint8_t { R0 = 0, R90 = 1, R180 = 2, R270 = 3 };

std::string_view to_string(Rotation rotation);

}  // namespace edmlp
