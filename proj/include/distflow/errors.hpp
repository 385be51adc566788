#pragma once

#include <stdexcept>
#include <string>

namespace distflow {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structural problem in a network or feeder description.
struct ValidationError : Error {
    using Error::Error;
};

/// Feeder text could not be parsed. Position is 1-based; 0 when unknown.
struct ParseError : Error {
    explicit ParseError(const std::string& what, int line = 0, int column = 0)
        : Error(what), line(line), column(column) {}
    int line = 0;
    int column = 0;
};

/// Operation needs a different topology (radial vs meshed, connectivity).
struct TopologyError : Error {
    using Error::Error;
};

/// Singular matrix, division guard, or other numeric failure.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace distflow
