#pragma once

#include <stdexcept>
#include <string>

namespace driftwatch {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments, violated preconditions, malformed configuration.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Malformed CSV / JSON input.
class FormatError : public Error {
public:
    using Error::Error;
};

// Zero pooled variance, constant samples, and similar numerical dead ends.
class DegenerateSample : public Error {
public:
    using Error::Error;
};

class MissingMoments : public Error {
public:
    using Error::Error;
};

// Monte-Carlo calibration ran out of surviving null streams.
class CalibrationError : public Error {
public:
    using Error::Error;
};

// A CPM detector was requested but no threshold table is available.
class MissingThresholds : public Error {
public:
    using Error::Error;
};

}  // namespace driftwatch
