#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace sse::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Populates a temporary sibling directory through `fill`, then swaps it in
/// place of `dir`. A previous `dir` is removed only after `fill` succeeds.
void write_directory_atomic(const std::filesystem::path& dir,
                            const std::function<void(const std::filesystem::path&)>& fill);

/// Exclusive lock file; creation fails if another holder exists.
class LockFile {
public:
    explicit LockFile(std::filesystem::path path);
    ~LockFile();
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::filesystem::path path_;
};

}  // namespace sse::io
