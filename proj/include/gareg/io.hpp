#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gareg/geometry.hpp"

namespace gareg {

enum class CloudFormat {
    Xyz,       // one point per line: x y z; '#' comments and blank lines ignored
    PlyAscii,  // ASCII 1.0 PLY with an element vertex carrying x/y/z
};

// Picks PLY for a .ply extension (case-insensitive), XYZ otherwise.
CloudFormat format_for_path(const std::string& path);

PointCloud load_cloud(const std::string& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);

// Parse/serialize against in-memory text; the file functions wrap these.
PointCloud parse_cloud(const std::string& text, CloudFormat format, const std::string& name);
std::string serialize_cloud(const PointCloud& cloud, CloudFormat format);

// Split one line into whitespace-separated tokens and parse each as a
// finite double. Reports ParseError with line/column for non-numeric
// tokens and NonFiniteCoordinateError for nan/inf text.
std::vector<double> parse_decimal_fields(std::string_view line, const std::string& name,
                                         int line_no);

// Write-temp-then-rename so interrupted runs never leave truncated files.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// FNV-1a 64-bit over the raw bytes, hex encoded; used for run manifests.
std::string content_hash_hex(const std::string& bytes);
std::string file_hash_hex(const std::string& path);

}  // namespace gareg
