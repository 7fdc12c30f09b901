#pragma once

#include <stdexcept>
#include <string>

namespace toprec {

// Base for all library errors; subcategories map to CLI exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or unusable input data (corpus lines, vocabulary files, plans).
struct DataError : Error {
    using Error::Error;
};

// Problems with trained models or bundles (dimension mismatch, bad version).
struct ModelError : Error {
    using Error::Error;
};

// Remote-fetch failures.
struct UpstreamError : Error {
    enum class Kind { not_found, auth, unavailable };
    Kind kind;
    UpstreamError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

}  // namespace toprec
