#pragma once

#include <filesystem>

#include "acs/data/types.hpp"
#include "acs/errors.hpp"

namespace acs::data {

class FormatError : public Error {
public:
    using Error::Error;
};
class HeaderError : public FormatError {
public:
    using FormatError::FormatError;
};
class TruncationError : public FormatError {
public:
    using FormatError::FormatError;
};
class ChecksumError : public FormatError {
public:
    using FormatError::FormatError;
};
class ShapeMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};
class EndiannessError : public FormatError {
public:
    using FormatError::FormatError;
};

inline constexpr int kDatasetFormatVersion = 1;

/// Writes `dir/meta.json` and `dir/data.bin`; creates `dir` if needed.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace acs::data
