#pragma once

#include <stdexcept>
#include <string>

namespace hps {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent dataset input (files, declarations, records).
class DataError : public Error {
public:
    using Error::Error;
};

// Query and record (or two queries) built against different schemas.
class SchemaMismatch : public Error {
public:
    using Error::Error;
};

// Invalid query construction: bound slot re-bound, out-of-domain value, bad text.
class QueryError : public Error {
public:
    using Error::Error;
};

// Experiment file or sampler configuration that fails validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

class BudgetExhausted : public Error {
public:
    using Error::Error;
};

class InvalidPageToken : public Error {
public:
    using Error::Error;
};

// Raised when lattice enumeration would exceed its configured cap.
class OverflowError : public Error {
public:
    using Error::Error;
};

}  // namespace hps
