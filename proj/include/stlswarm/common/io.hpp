#pragma once

#include <filesystem>
#include <string>

namespace stlswarm::common {

// Writes via a sibling temp file and rename, so readers never observe a
// partial file.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace stlswarm::common
