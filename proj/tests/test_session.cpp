#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "gestfuse/aedat.hpp"
#include "gestfuse/emg_csv.hpp"
#include "gestfuse/error.hpp"
#include "gestfuse/pgm.hpp"
#include "gestfuse/session.hpp"
#include "support/tempdir.hpp"

using namespace gestfuse;

namespace {

// Lays out a session directory: events spread uniformly over the recording,
// 200 Hz EMG, a handful of APS frames, and back-to-back gesture annotations
// separated by 1 s rests.
struct SessionFixture {
  testsupport::TempDir dir;
  std::filesystem::path manifest_path;
  SessionManifest manifest;
  std::vector<DvsEvent> events;

  explicit SessionFixture(int gesture_count = 5, int reps = 5, int64_t first_start = 1000000,
                          int64_t gesture_us = 2000000, int64_t rest_us = 1000000,
                          bool with_aps = false) {
    const SensorGeometry geom =
        with_aps ? geometry_for(SensorKind::davis240) : geometry_for(SensorKind::dvs128);
    int64_t t = first_start;
    for (int r = 0; r < reps; ++r)
      for (int g = 0; g < gesture_count; ++g) {
        manifest.annotations.push_back({static_cast<Gesture>(g), t, t + gesture_us});
        t += gesture_us + rest_us;
      }
    const int64_t t_end = t;

    std::mt19937 rng(42);
    std::uniform_int_distribution<int> xd(0, geom.width - 1), yd(0, geom.height - 1);
    int64_t et = 0;
    while (et < t_end) {
      events.push_back({static_cast<uint16_t>(xd(rng)), static_cast<uint16_t>(yd(rng)), et,
                        (et & 1) != 0});
      et += 137;  // ~7.3 kHz, coprime with the window length
    }
    write_aedat(dir.path() / "events.aedat", geom, events);

    EmgRecording emg;
    emg.channel_count = 8;
    emg.sample_rate = 200.0;
    std::uniform_real_distribution<double> amp(-30.0, 30.0);
    for (int64_t ts = 0; ts < t_end; ts += 5000) {
      emg.t_us.push_back(ts);
      for (int c = 0; c < 8; ++c) emg.data.push_back(amp(rng));
    }
    write_emg_csv(dir.path() / "emg.csv", emg);

    manifest.subject = "s01";
    manifest.session = "a";
    manifest.events_file = "events.aedat";
    manifest.emg_file = "emg.csv";
    if (with_aps) {
      std::filesystem::create_directories(dir.path() / "aps");
      std::vector<double> pixels(static_cast<std::size_t>(geom.width) * geom.height, 0.5);
      for (int64_t ts = 0; ts < t_end; ts += 100000)  // 10 fps
        write_pgm(dir.path() / "aps" / (std::to_string(ts) + ".pgm"), geom.width, geom.height,
                  pixels);
      manifest.aps_dir = "aps";
    }
    manifest_path = dir.path() / "session.json";
    save_manifest(manifest_path, manifest);
  }
};

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("manifest with 25 annotations loads as 25 labeled intervals") {
    SessionFixture fx;
    const Session s = load_session(fx.manifest_path);
    CHECK(s.manifest.annotations.size() == 25);
    CHECK(s.manifest.subject == "s01");
    CHECK(s.geometry.kind == SensorKind::dvs128);
    CHECK(s.emg.channel_count == 8);
    CHECK(s.events.size() == fx.events.size());
  }

  TEST_CASE("manifest round-trips through save/load") {
    SessionFixture fx;
    const SessionManifest m = load_manifest(fx.manifest_path);
    CHECK(m.annotations.size() == fx.manifest.annotations.size());
    for (std::size_t i = 0; i < m.annotations.size(); ++i) {
      CHECK(m.annotations[i].label == fx.manifest.annotations[i].label);
      CHECK(m.annotations[i].start_us == fx.manifest.annotations[i].start_us);
      CHECK(m.annotations[i].end_us == fx.manifest.annotations[i].end_us);
    }
  }

  TEST_CASE("overlapping annotations raise OverlappingAnnotations") {
    SessionFixture fx;
    fx.manifest.annotations[1].start_us = fx.manifest.annotations[0].end_us - 1;
    save_manifest(fx.manifest_path, fx.manifest);
    try {
      load_manifest(fx.manifest_path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::overlapping_annotations);
    }
  }

  TEST_CASE("missing event file raises MissingFile") {
    SessionFixture fx;
    std::filesystem::remove(fx.dir.path() / "events.aedat");
    try {
      load_session(fx.manifest_path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::missing_file);
    }
  }

  TEST_CASE("2 s gestures with T=200 ms slice into 10 windows each") {
    SessionFixture fx(1, 1);  // single 2 s annotation
    const Session s = load_session(fx.manifest_path);
    const auto windows = window_slices(s, 200);
    REQUIRE(windows.size() == 10);
    for (std::size_t i = 0; i < windows.size(); ++i) {
      CHECK(windows[i].n == i);
      CHECK(windows[i].t_end - windows[i].t_start == 200000);
      CHECK(windows[i].label == Gesture::pinky);
    }
  }

  TEST_CASE("2 s gestures with T=150 ms slice into 13 windows, last 50 ms dropped") {
    SessionFixture fx(1, 1);
    const Session s = load_session(fx.manifest_path);
    const auto windows = window_slices(s, 150);
    REQUIRE(windows.size() == 13);
    CHECK(windows.back().t_end == fx.manifest.annotations[0].start_us + 13 * 150000);
  }

  TEST_CASE("window n=3 of a gesture starting at 5000000 us begins at 5600000 us") {
    SessionFixture fx(1, 1, /*first_start=*/5000000);
    const Session s = load_session(fx.manifest_path);
    const auto windows = window_slices(s, 200);
    REQUIRE(windows.size() == 10);
    CHECK(windows[3].n == 3);
    CHECK(windows[3].t_start == 5600000);
    CHECK(windows[3].t_end == 5800000);
  }

  TEST_CASE("windows partition the tiled part of each interval exactly") {
    SessionFixture fx(5, 1);
    const Session s = load_session(fx.manifest_path);
    const auto windows = window_slices(s, 200);

    // Expected multiset: events with t in [start, start + k*T) per interval.
    std::vector<DvsEvent> expected;
    for (const auto& a : s.manifest.annotations) {
      const int64_t k = (a.end_us - a.start_us) / 200000;
      for (const auto& e : s.events)
        if (e.t_us >= a.start_us && e.t_us < a.start_us + k * 200000) expected.push_back(e);
    }
    std::vector<DvsEvent> got;
    for (const auto& w : windows) {
      for (const auto& e : w.events) {
        CHECK(e.t_us >= w.t_start);
        CHECK(e.t_us < w.t_end);
        got.push_back(e);
      }
    }
    auto key = [](const DvsEvent& e) { return std::tuple(e.t_us, e.x, e.y, e.on); };
    auto by_key = [&](const DvsEvent& a, const DvsEvent& b) { return key(a) < key(b); };
    std::sort(expected.begin(), expected.end(), by_key);
    std::sort(got.begin(), got.end(), by_key);
    CHECK(got == expected);
  }

  TEST_CASE("every EMG row in a window lies inside [t_start, t_end)") {
    SessionFixture fx(5, 2);
    const Session s = load_session(fx.manifest_path);
    for (const auto& w : window_slices(s, 250)) {
      for (std::size_t i = 0; i < w.emg.sample_count(); ++i) {
        CHECK(w.emg.t_us[i] >= w.t_start);
        CHECK(w.emg.t_us[i] < w.t_end);
      }
      CHECK(w.emg.channel_count == 8);
    }
  }

  TEST_CASE("window indices are global and strictly increasing across intervals") {
    SessionFixture fx(5, 3);
    const Session s = load_session(fx.manifest_path);
    const auto windows = window_slices(s, 200);
    CHECK(windows.size() == 5 * 3 * 10);
    for (std::size_t i = 0; i < windows.size(); ++i) CHECK(windows[i].n == i);
    for (std::size_t i = 1; i < windows.size(); ++i)
      CHECK(windows[i].t_start >= windows[i - 1].t_end);
  }

  TEST_CASE("rest gaps contribute no windows") {
    SessionFixture fx(2, 1);
    const Session s = load_session(fx.manifest_path);
    for (const auto& w : window_slices(s, 200)) {
      const bool inside = std::any_of(
          s.manifest.annotations.begin(), s.manifest.annotations.end(), [&](const auto& a) {
            return w.t_start >= a.start_us && w.t_end <= a.end_us;
          });
      CHECK(inside);
      CHECK(w.label.has_value());
    }
  }

  TEST_CASE("APS frames land in their windows when an aps_dir is present") {
    SessionFixture fx(1, 1, 1000000, 2000000, 1000000, /*with_aps=*/true);
    const Session s = load_session(fx.manifest_path);
    CHECK(!s.aps.empty());
    const auto windows = window_slices(s, 200);
    REQUIRE(windows.size() == 10);
    std::size_t total = 0;
    for (const auto& w : windows) {
      for (const auto& f : w.aps) {
        CHECK(f.t_us >= w.t_start);
        CHECK(f.t_us < w.t_end);
        CHECK(f.width == 240);
        CHECK(f.height == 180);
      }
      total += w.aps.size();
    }
    CHECK(total == 20);  // 10 fps over the tiled 2 s
  }

  TEST_CASE("unlabeled slicing covers the whole stream") {
    SessionFixture fx(1, 1);
    const Session s = load_session(fx.manifest_path);
    const auto windows = window_slices_unlabeled(s, 200);
    REQUIRE(!windows.empty());
    CHECK(windows.front().t_start == 0);
    int64_t t_max = 0;
    for (const auto& e : s.events) t_max = std::max(t_max, e.t_us);
    for (const auto& t : s.emg.t_us) t_max = std::max(t_max, t);
    CHECK(windows.back().t_end > t_max);
    for (const auto& w : windows) CHECK(!w.label.has_value());
    std::size_t seen = 0;
    for (const auto& w : windows) seen += w.events.size();
    CHECK(seen == s.events.size());
  }
}
