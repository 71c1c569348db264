#pragma once

#include <string>

namespace frapdesign {

/// Writes contents to path via a temp file + rename, so readers never see a
/// partial file. Throws std::runtime_error on I/O failure.
void atomic_write_file(const std::string& path, const std::string& contents);

/// Whole-file read; throws std::runtime_error if the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace frapdesign
