#include "gestfuse/emg_csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gestfuse/error.hpp"

namespace gestfuse {

namespace {

constexpr double kMyoDefaultRate = 200.0;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string f = line.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!f.empty() && f.back() == '\r') f.pop_back();
    fields.push_back(f);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

int64_t parse_i64(const std::string& s, std::size_t row) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    raise(Errc::ragged_row, "row " + std::to_string(row) + ": bad timestamp '" + s + "'");
  return v;
}

double parse_f64(const std::string& s, std::size_t row) {
  // from_chars for doubles is incomplete on some libstdc++ versions; strtod
  // handles the plain decimal values this format carries.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    raise(Errc::ragged_row, "row " + std::to_string(row) + ": bad value '" + s + "'");
  return v;
}

}  // namespace

EmgRecording parse_emg_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) raise(Errc::ragged_row, "empty file, expected header row");

  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 2 || header[0] != "t_us")
    raise(Errc::ragged_row, "header must be t_us,ch0,..,chN");
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] != "ch" + std::to_string(c - 1))
      raise(Errc::ragged_row, "unexpected header column '" + header[c] + "'");
  }

  EmgRecording rec;
  rec.channel_count = header.size() - 1;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size())
      raise(Errc::ragged_row, "row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size() - 1) + " channel values, expected " +
                                  std::to_string(rec.channel_count));
    const int64_t t = parse_i64(fields[0], row);
    if (t < 0) raise(Errc::non_monotonic_time, "row " + std::to_string(row) + ": negative timestamp");
    if (!rec.t_us.empty() && t < rec.t_us.back())
      raise(Errc::non_monotonic_time,
            "row " + std::to_string(row) + ": timestamp decreased from " +
                std::to_string(rec.t_us.back()) + " to " + std::to_string(t));
    rec.t_us.push_back(t);
    for (std::size_t c = 1; c < fields.size(); ++c) rec.data.push_back(parse_f64(fields[c], row));
  }

  rec.t0 = rec.t_us.empty() ? 0 : rec.t_us.front();
  if (rec.t_us.size() >= 2 && rec.t_us.back() > rec.t_us.front()) {
    rec.sample_rate =
        1e6 * double(rec.t_us.size() - 1) / double(rec.t_us.back() - rec.t_us.front());
  } else {
    rec.sample_rate = kMyoDefaultRate;
  }
  return rec;
}

EmgRecording read_emg_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::missing_file, "cannot open EMG file " + path.string());
  return parse_emg_csv(in);
}

void write_emg_csv(std::ostream& out, const EmgRecording& rec) {
  out << "t_us";
  for (std::size_t c = 0; c < rec.channel_count; ++c) out << ",ch" << c;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < rec.sample_count(); ++i) {
    out << rec.t_us[i];
    const auto row = rec.sample(i);
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
}

void write_emg_csv(const std::filesystem::path& path, const EmgRecording& rec) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot create " + path.string());
  write_emg_csv(out, rec);
}

}  // namespace gestfuse
