#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace tabeval {

/// Formats a double with 17 significant digits ("%.17g"). Non-finite values
/// become "nan", "inf" or "-inf".
std::string format_double(double value);

/// Serializes `value` canonically: object keys sorted, floating-point numbers
/// at 17 significant digits, non-finite numbers as null, two-space indent.
/// Equal documents always produce identical bytes.
std::string canonical_dump(const nlohmann::json& value);

/// Writes `contents` to `path` via a temporary sibling file and rename, so a
/// reader never observes a partially written file. Throws Error(IoFailure).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace tabeval
