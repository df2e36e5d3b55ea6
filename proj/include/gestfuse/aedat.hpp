#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "gestfuse/types.hpp"

namespace gestfuse {

struct AedatData {
  SensorGeometry geometry;
  std::vector<DvsEvent> events;
};

// AEDAT 2.0: ASCII '#'-prefixed header lines, first line exactly
// `#!AER-DAT2.0`, optional `# chip: DVS128` or `# chip: DAVIS240`
// (default DVS128), then repeated 8-byte records of big-endian 32-bit
// address word + big-endian 32-bit microsecond timestamp.
//
// Address layout: bit 0 = polarity (1 = ON). DVS128 packs x in bits 1-7
// and y in bits 8-14; DAVIS240 packs x in bits 1-8 and y in bits 9-16.
//
// Timestamps are unwrapped on read: a raw timestamp smaller than its
// predecessor by more than 2^31 is treated as 32-bit wraparound, smaller
// regressions raise NonMonotonicTime.
AedatData parse_aedat(std::istream& in);
AedatData read_aedat(const std::filesystem::path& path);

// Inverse of parse_aedat, bit-exact round trip. Events must be in
// non-decreasing time order, start below 2^32 us and advance by less than
// 2^31 us between consecutive records so the truncated 32-bit timestamps
// unwrap to the identical sequence.
void write_aedat(std::ostream& out, const SensorGeometry& geometry,
                 std::span<const DvsEvent> events);
void write_aedat(const std::filesystem::path& path, const SensorGeometry& geometry,
                 std::span<const DvsEvent> events);

}  // namespace gestfuse
