#pragma once

#include <stdexcept>
#include <string>

namespace sentigan {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/network shape incompatibility.
struct ShapeError : Error {
    using Error::Error;
};

// A documented precondition was violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

// Mask with zero total weight where positive weight is required.
struct DegenerateMaskError : Error {
    using Error::Error;
};

// Malformed file contents (bad magic, checksum, unparsable fields).
struct FormatError : Error {
    using Error::Error;
};

// Filesystem-level failure (open/read/write/rename).
struct IoError : Error {
    using Error::Error;
};

}  // namespace sentigan
