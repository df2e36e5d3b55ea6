#include "gestfuse/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "gestfuse/error.hpp"

namespace gestfuse {

namespace {

// Reads the next whitespace-separated token, skipping `#` comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::missing_file, "cannot open " + path.string());

  if (next_token(in) != "P5") raise(Errc::io_error, path.string() + " is not a binary PGM (P5)");
  PgmImage img;
  try {
    img.width = static_cast<uint16_t>(std::stoul(next_token(in)));
    img.height = static_cast<uint16_t>(std::stoul(next_token(in)));
    const unsigned maxval = std::stoul(next_token(in));
    if (maxval != 255) raise(Errc::io_error, path.string() + ": only 8-bit PGM supported");
  } catch (const std::logic_error&) {
    raise(Errc::io_error, path.string() + ": bad PGM header");
  }

  const std::size_t count = std::size_t(img.width) * img.height;
  std::vector<unsigned char> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count)
    raise(Errc::io_error, path.string() + ": truncated pixel data");

  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) img.pixels[i] = raw[i] / 255.0;
  return img;
}

void write_pgm(const std::filesystem::path& path, uint16_t width, uint16_t height,
               const std::vector<double>& pixels) {
  if (pixels.size() != std::size_t(width) * height)
    raise(Errc::shape_mismatch, "pixel count does not match " + std::to_string(width) + "x" +
                                    std::to_string(height));
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot create " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  std::vector<unsigned char> raw(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double clamped = std::clamp(pixels[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(clamped * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) raise(Errc::io_error, "short write to " + path.string());
}

}  // namespace gestfuse
