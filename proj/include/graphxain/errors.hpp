#pragma once

#include <stdexcept>
#include <string>

namespace graphxain {

// Error taxonomy mirrored by the CLI exit-code table (see README):
//   0 ok, 2 I/O, 3 validation (incl. data parse), 4 numeric, 5 provider.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input data (CSV/JSON); messages carry the offending line.
class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finiteness is an invariant (e.g. NaN training loss).
class NumericError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

class CredentialError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int io = 2;
inline constexpr int validation = 3;
inline constexpr int numeric = 4;
inline constexpr int provider = 5;
} // namespace exit_code

int exit_code_for(const std::exception& e);

} // namespace graphxain
