#include "gestfuse/session.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <json.hpp>

#include "gestfuse/aedat.hpp"
#include "gestfuse/emg_csv.hpp"
#include "gestfuse/error.hpp"
#include "gestfuse/pgm.hpp"

namespace gestfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base_dir, const fs::path& p) {
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<ApsFrame> load_aps_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) raise(Errc::missing_file, "APS directory " + dir.string() + " not found");
  std::vector<ApsFrame> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    int64_t t = 0;
    auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), t);
    if (ec != std::errc{} || ptr != stem.data() + stem.size())
      raise(Errc::io_error, "APS file " + entry.path().string() +
                                " must be named <t_us>.pgm with an integer timestamp");
    PgmImage img = read_pgm(entry.path());
    frames.push_back({img.width, img.height, std::move(img.pixels), t});
  }
  std::sort(frames.begin(), frames.end(),
            [](const ApsFrame& a, const ApsFrame& b) { return a.t_us < b.t_us; });
  return frames;
}

// Binary search helpers over time-sorted vectors.
template <typename T, typename GetT>
std::pair<std::size_t, std::size_t> time_range(const std::vector<T>& v, int64_t lo, int64_t hi,
                                               GetT get_t) {
  auto first = std::lower_bound(v.begin(), v.end(), lo,
                                [&](const T& e, int64_t t) { return get_t(e) < t; });
  auto last = std::lower_bound(first, v.end(), hi,
                               [&](const T& e, int64_t t) { return get_t(e) < t; });
  return {static_cast<std::size_t>(first - v.begin()), static_cast<std::size_t>(last - v.begin())};
}

SyncWindow make_window(const Session& session, std::size_t n, int64_t t_start, int64_t t_end,
                       std::optional<Gesture> label) {
  SyncWindow w;
  w.n = n;
  w.t_start = t_start;
  w.t_end = t_end;
  w.label = label;

  auto [e0, e1] = time_range(session.events, t_start, t_end,
                             [](const DvsEvent& e) { return e.t_us; });
  w.events.assign(session.events.begin() + e0, session.events.begin() + e1);

  const EmgRecording& emg = session.emg;
  auto t_lo = std::lower_bound(emg.t_us.begin(), emg.t_us.end(), t_start);
  auto t_hi = std::lower_bound(t_lo, emg.t_us.end(), t_end);
  const std::size_t s0 = t_lo - emg.t_us.begin();
  const std::size_t s1 = t_hi - emg.t_us.begin();
  w.emg.sample_rate = emg.sample_rate;
  w.emg.channel_count = emg.channel_count;
  w.emg.t_us.assign(emg.t_us.begin() + s0, emg.t_us.begin() + s1);
  w.emg.data.assign(emg.data.begin() + s0 * emg.channel_count,
                    emg.data.begin() + s1 * emg.channel_count);
  w.emg.t0 = w.emg.t_us.empty() ? t_start : w.emg.t_us.front();

  auto [a0, a1] = time_range(session.aps, t_start, t_end,
                             [](const ApsFrame& f) { return f.t_us; });
  w.aps.assign(session.aps.begin() + a0, session.aps.begin() + a1);
  return w;
}

}  // namespace

SessionManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::missing_file, "cannot open manifest " + path.string());

  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    raise(Errc::io_error, "manifest " + path.string() + ": " + e.what());
  }

  SessionManifest m;
  try {
    m.subject = doc.at("subject").get<std::string>();
    m.session = doc.at("session").get<std::string>();
    m.events_file = doc.at("events_file").get<std::string>();
    m.emg_file = doc.at("emg_file").get<std::string>();
    if (doc.contains("aps_dir")) m.aps_dir = fs::path(doc.at("aps_dir").get<std::string>());
    for (const auto& a : doc.at("annotations")) {
      GestureInterval gi;
      gi.label = parse_gesture(a.at("label").get<std::string>());
      gi.start_us = a.at("start_us").get<int64_t>();
      gi.end_us = a.at("end_us").get<int64_t>();
      if (gi.end_us <= gi.start_us)
        raise(Errc::overlapping_annotations,
              "annotation [" + std::to_string(gi.start_us) + "," + std::to_string(gi.end_us) +
                  ") is empty or inverted");
      m.annotations.push_back(gi);
    }
  } catch (const json::exception& e) {
    raise(Errc::io_error, "manifest " + path.string() + ": " + e.what());
  }

  std::sort(m.annotations.begin(), m.annotations.end(),
            [](const GestureInterval& a, const GestureInterval& b) {
              return a.start_us < b.start_us;
            });
  for (std::size_t i = 1; i < m.annotations.size(); ++i) {
    if (m.annotations[i].start_us < m.annotations[i - 1].end_us)
      raise(Errc::overlapping_annotations,
            "annotations starting at " + std::to_string(m.annotations[i - 1].start_us) + " and " +
                std::to_string(m.annotations[i].start_us) + " us overlap");
  }
  return m;
}

void save_manifest(const fs::path& path, const SessionManifest& manifest) {
  json doc;
  doc["subject"] = manifest.subject;
  doc["session"] = manifest.session;
  doc["events_file"] = manifest.events_file.string();
  doc["emg_file"] = manifest.emg_file.string();
  if (manifest.aps_dir) doc["aps_dir"] = manifest.aps_dir->string();
  doc["annotations"] = json::array();
  for (const auto& a : manifest.annotations) {
    doc["annotations"].push_back(
        {{"label", gesture_name(a.label)}, {"start_us", a.start_us}, {"end_us", a.end_us}});
  }
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot create " + path.string());
  out << doc.dump(2) << "\n";
}

Session load_session(const fs::path& manifest_path) {
  Session s;
  s.manifest = load_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();

  AedatData aedat = read_aedat(resolve(base, s.manifest.events_file));
  s.geometry = aedat.geometry;
  s.events = std::move(aedat.events);
  s.emg = read_emg_csv(resolve(base, s.manifest.emg_file));
  if (s.manifest.aps_dir) s.aps = load_aps_dir(resolve(base, *s.manifest.aps_dir));
  return s;
}

std::vector<SyncWindow> window_slices(const Session& session, int window_ms) {
  if (window_ms <= 0) raise(Errc::bad_config, "window length must be positive");
  const int64_t window_us = int64_t(window_ms) * 1000;

  std::vector<SyncWindow> windows;
  std::size_t n = 0;
  for (const GestureInterval& gi : session.manifest.annotations) {
    const int64_t len = gi.end_us - gi.start_us;
    const int64_t k = len / window_us;  // trailing partial window dropped
    for (int64_t i = 0; i < k; ++i) {
      const int64_t t0 = gi.start_us + i * window_us;
      windows.push_back(make_window(session, n++, t0, t0 + window_us, gi.label));
    }
  }
  return windows;
}

std::vector<SyncWindow> window_slices_unlabeled(const Session& session, int window_ms) {
  if (window_ms <= 0) raise(Errc::bad_config, "window length must be positive");
  const int64_t window_us = int64_t(window_ms) * 1000;

  int64_t t_max = -1;
  if (!session.events.empty()) t_max = std::max(t_max, session.events.back().t_us);
  if (!session.emg.t_us.empty()) t_max = std::max(t_max, session.emg.t_us.back());
  if (!session.aps.empty()) t_max = std::max(t_max, session.aps.back().t_us);
  if (t_max < 0) return {};

  const int64_t k = (t_max + 1) / window_us + (((t_max + 1) % window_us) ? 1 : 0);
  std::vector<SyncWindow> windows;
  for (int64_t i = 0; i < k; ++i) {
    windows.push_back(make_window(session, static_cast<std::size_t>(i), i * window_us,
                                  (i + 1) * window_us, std::nullopt));
  }
  return windows;
}

}  // namespace gestfuse
