#include "gestfuse/aedat.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gestfuse/error.hpp"

namespace gestfuse {

namespace {

constexpr char kMagic[] = "#!AER-DAT2.0";
constexpr int64_t kWrapSpan = int64_t{1} << 32;
constexpr int64_t kWrapThreshold = int64_t{1} << 31;

uint32_t be32(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
         uint32_t(p[3]);
}

void put_be32(unsigned char* p, uint32_t v) {
  p[0] = static_cast<unsigned char>(v >> 24);
  p[1] = static_cast<unsigned char>(v >> 16);
  p[2] = static_cast<unsigned char>(v >> 8);
  p[3] = static_cast<unsigned char>(v);
}

// Field widths of the address word per sensor. Polarity is always bit 0.
struct AddressLayout {
  int coord_bits;
};

AddressLayout layout_for(SensorKind kind) {
  return kind == SensorKind::dvs128 ? AddressLayout{7} : AddressLayout{8};
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

AedatData parse_aedat(std::istream& in) {
  AedatData out;
  out.geometry = geometry_for(SensorKind::dvs128);

  std::string line;
  bool first = true;
  while (in.peek() == '#') {
    if (!std::getline(in, line)) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      if (line != kMagic)
        raise(Errc::malformed_header, "first header line is not " + std::string(kMagic));
      first = false;
      continue;
    }
    if (line.rfind("# chip:", 0) == 0) {
      std::string chip = trim(line.substr(7));
      if (chip == "DVS128") {
        out.geometry = geometry_for(SensorKind::dvs128);
      } else if (chip == "DAVIS240") {
        out.geometry = geometry_for(SensorKind::davis240);
      } else {
        raise(Errc::malformed_header, "unknown chip '" + chip + "'");
      }
    }
    // other comment lines are ignored
  }
  if (first) raise(Errc::malformed_header, "missing " + std::string(kMagic) + " magic line");

  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (body.size() % 8 != 0)
    raise(Errc::truncated_event,
          "event body is " + std::to_string(body.size()) + " bytes, not a multiple of 8");

  const AddressLayout layout = layout_for(out.geometry.kind);
  const uint32_t coord_mask = (1u << layout.coord_bits) - 1;

  int64_t offset = 0;
  uint32_t prev_raw = 0;
  bool have_prev = false;

  out.events.reserve(body.size() / 8);
  const auto* p = reinterpret_cast<const unsigned char*>(body.data());
  for (std::size_t i = 0; i < body.size(); i += 8) {
    const uint32_t addr = be32(p + i);
    const uint32_t raw_ts = be32(p + i + 4);

    DvsEvent ev;
    ev.on = (addr & 1u) != 0;
    ev.x = static_cast<uint16_t>((addr >> 1) & coord_mask);
    ev.y = static_cast<uint16_t>((addr >> (1 + layout.coord_bits)) & coord_mask);
    if (ev.x >= out.geometry.width || ev.y >= out.geometry.height)
      raise(Errc::coordinate_out_of_range,
            "event at record " + std::to_string(i / 8) + " decodes to (" +
                std::to_string(ev.x) + "," + std::to_string(ev.y) + ") outside " +
                std::to_string(out.geometry.width) + "x" + std::to_string(out.geometry.height));

    if (have_prev && raw_ts < prev_raw) {
      const int64_t regression = int64_t(prev_raw) - int64_t(raw_ts);
      if (regression > kWrapThreshold) {
        offset += kWrapSpan;
      } else {
        raise(Errc::non_monotonic_time,
              "timestamp regressed by " + std::to_string(regression) + " us at record " +
                  std::to_string(i / 8));
      }
    }
    prev_raw = raw_ts;
    have_prev = true;

    ev.t_us = offset + int64_t(raw_ts);
    out.events.push_back(ev);
  }
  return out;
}

AedatData read_aedat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::missing_file, "cannot open event file " + path.string());
  return parse_aedat(in);
}

void write_aedat(std::ostream& out, const SensorGeometry& geometry,
                 std::span<const DvsEvent> events) {
  out << kMagic << "\n";
  out << "# chip: " << sensor_kind_name(geometry.kind) << "\n";
  out << "# Data format: int32 address, int32 timestamp (8 bytes total), one record per event\n";
  out << "# Timestamps tick is 1 us\n";

  const AddressLayout layout = layout_for(geometry.kind);
  int64_t prev_t = -1;
  std::array<unsigned char, 8> rec;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const DvsEvent& ev = events[i];
    if (ev.x >= geometry.width || ev.y >= geometry.height)
      raise(Errc::coordinate_out_of_range,
            "event " + std::to_string(i) + " at (" + std::to_string(ev.x) + "," +
                std::to_string(ev.y) + ") outside " + std::to_string(geometry.width) + "x" +
                std::to_string(geometry.height));
    if (ev.t_us < 0 || (i == 0 && ev.t_us >= kWrapSpan))
      raise(Errc::non_monotonic_time,
            "first timestamp must lie in [0, 2^32) us, got " + std::to_string(ev.t_us));
    if (prev_t >= 0) {
      if (ev.t_us < prev_t)
        raise(Errc::non_monotonic_time, "events are not in non-decreasing time order");
      if (ev.t_us - prev_t >= kWrapThreshold)
        raise(Errc::non_monotonic_time,
              "timestamp gap of " + std::to_string(ev.t_us - prev_t) +
                  " us cannot survive 32-bit truncation");
    }
    prev_t = ev.t_us;

    const uint32_t addr = (uint32_t(ev.on ? 1 : 0)) | (uint32_t(ev.x) << 1) |
                          (uint32_t(ev.y) << (1 + layout.coord_bits));
    put_be32(rec.data(), addr);
    put_be32(rec.data() + 4, static_cast<uint32_t>(ev.t_us & 0xFFFFFFFF));
    out.write(reinterpret_cast<const char*>(rec.data()), rec.size());
  }
}

void write_aedat(const std::filesystem::path& path, const SensorGeometry& geometry,
                 std::span<const DvsEvent> events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot create " + path.string());
  write_aedat(out, geometry, events);
  if (!out) raise(Errc::io_error, "short write to " + path.string());
}

}  // namespace gestfuse
