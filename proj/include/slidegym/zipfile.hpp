#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Minimal ZIP support for the PPTX exporter: stored (uncompressed) entries
// only, which every Open-XML reader accepts.

namespace slidegym::zipfile {

struct Entry {
    std::string name;
    std::string data;
};

/// Serialize entries into a ZIP archive (stored, no compression).
std::string write_archive(const std::vector<Entry>& entries);

/// Entry names from an archive's central directory, in directory order.
/// Throws std::runtime_error if the central directory cannot be located.
std::vector<std::string> list_entries(std::string_view archive);

std::vector<std::string> list_entries_file(const std::filesystem::path& path);

/// Extract one entry's payload; throws if the entry is missing.
std::string read_entry(std::string_view archive, std::string_view name);

}  // namespace slidegym::zipfile
