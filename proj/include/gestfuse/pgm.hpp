#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gestfuse {

struct PgmImage {
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<double> pixels;  // [0,1], row-major
};

// Binary PGM (P5), 8-bit. Values are scaled by 255 and rounded on write,
// divided by 255 on read.
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, uint16_t width, uint16_t height,
               const std::vector<double>& pixels);

}  // namespace gestfuse
