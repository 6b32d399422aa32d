#pragma once

#include <stdexcept>
#include <string>

namespace topoeval {

// Thrown when two rasters/pyramids that must agree in shape do not.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for out-of-range values (pixel values, thresholds, ids, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for malformed on-disk artifacts.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a record references an entity that does not exist.
struct ReferenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for filesystem-level failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace topoeval
