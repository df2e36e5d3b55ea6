#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gestfuse {

// Binary model container: the magic bytes `FGCN`, a format version, a JSON
// architecture descriptor, then the parameter blobs as little-endian 64-bit
// floats. Every field is explicitly little-endian so files move between
// hosts. Layout:
//
//   char[4]  magic "FGCN"
//   u32      version
//   u32      descriptor byte length, followed by that many JSON bytes
//   u32      blob count
//   per blob: u64 value count, then count * f64
inline constexpr std::uint32_t kFgcnVersion = 1;

struct FgcnContent {
  std::uint32_t version = kFgcnVersion;
  std::string descriptor;  // JSON text
  std::vector<std::vector<double>> blobs;
};

void write_fgcn(std::ostream& out, const std::string& descriptor,
                std::span<const std::vector<double>> blobs);
FgcnContent read_fgcn(std::istream& in);

// Raise IoError when the file cannot be opened or is not a valid container.
void write_fgcn_file(const std::filesystem::path& path, const std::string& descriptor,
                     std::span<const std::vector<double>> blobs);
FgcnContent read_fgcn_file(const std::filesystem::path& path);

}  // namespace gestfuse
