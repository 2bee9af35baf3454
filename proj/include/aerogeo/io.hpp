#pragma once

#include <filesystem>
#include <functional>
#include <ostream>

namespace aerogeo {

/// Writes `path` through a temporary sibling that is renamed into place, so
/// readers never observe a half-written file. Throws IoError.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

/// Creates the directory (and parents). Throws IoError.
void ensure_directory(const std::filesystem::path& dir);

} // namespace aerogeo
