#pragma once

#include <string>

namespace lfgnn {

// Whole-file write via a temp file in the same directory followed by rename,
// so readers never observe a half-written artifact.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

} // namespace lfgnn
