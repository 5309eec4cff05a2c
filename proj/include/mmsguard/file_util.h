#ifndef MMSGUARD_FILE_UTIL_H
#define MMSGUARD_FILE_UTIL_H

#include "mmsguard/bytes.h"

#include <filesystem>
#include <string>
#include <string_view>

namespace mmsguard {

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);
void write_file_atomic(const std::filesystem::path& path, ByteView data);

std::string read_text_file(const std::filesystem::path& path);

} // namespace mmsguard

#endif
