#pragma once

#include <stdexcept>
#include <string>

namespace bpem {

// Precondition violations (width mismatch, singular matrix, bad parameters)
// are reported as std::invalid_argument. The types below cover data that
// arrives from outside the library.

/// Malformed text input: hex strings, key files, permutation tables, KATs.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ciphertext whose length or padding does not decode.
class PaddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bpem
