#include "gestfuse/fgcn.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "gestfuse/error.hpp"

namespace gestfuse {

namespace {

constexpr char kMagic[4] = {'F', 'G', 'C', 'N'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    raise(Errc::io_error, "model container ends mid-field");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    raise(Errc::io_error, "model container ends mid-field");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_fgcn(std::ostream& out, const std::string& descriptor,
                std::span<const std::vector<double>> blobs) {
  out.write(kMagic, 4);
  put_u32(out, kFgcnVersion);
  if (descriptor.size() > std::numeric_limits<std::uint32_t>::max())
    raise(Errc::io_error, "descriptor too large");
  put_u32(out, static_cast<std::uint32_t>(descriptor.size()));
  out.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
  put_u32(out, static_cast<std::uint32_t>(blobs.size()));
  for (const auto& blob : blobs) {
    put_u64(out, blob.size());
    for (double v : blob) put_f64(out, v);
  }
  if (!out) raise(Errc::io_error, "failed writing model container");
}

FgcnContent read_fgcn(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    raise(Errc::io_error, "not a model container (bad magic)");
  FgcnContent content;
  content.version = get_u32(in);
  if (content.version != kFgcnVersion)
    raise(Errc::io_error, "unsupported model container version " +
                              std::to_string(content.version));
  const std::uint32_t desc_len = get_u32(in);
  content.descriptor.resize(desc_len);
  if (desc_len > 0 &&
      !in.read(content.descriptor.data(), static_cast<std::streamsize>(desc_len)))
    raise(Errc::io_error, "model container ends mid-descriptor");
  const std::uint32_t blob_count = get_u32(in);
  content.blobs.resize(blob_count);
  for (auto& blob : content.blobs) {
    const std::uint64_t n = get_u64(in);
    blob.resize(n);
    for (double& v : blob) v = get_f64(in);
  }
  return content;
}

void write_fgcn_file(const std::filesystem::path& path, const std::string& descriptor,
                     std::span<const std::vector<double>> blobs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot open " + path.string() + " for writing");
  write_fgcn(out, descriptor, blobs);
  out.close();
  if (!out) raise(Errc::io_error, "failed writing " + path.string());
}

FgcnContent read_fgcn_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::missing_file, "cannot open " + path.string());
  return read_fgcn(in);
}

}  // namespace gestfuse
