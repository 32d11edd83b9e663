#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace qsan {

// Writes through a sibling temporary file and renames it over `path`, so a
// failed write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer, bool binary = false);

}  // namespace qsan
