// File helpers shared by the artifact writers.
#pragma once

#include <string>

namespace trf::io {

// Writes to a sibling temporary file, flushes and renames over path.
void atomic_write(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);
// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace trf::io
