#pragma once

#include <filesystem>
#include <vector>

#include "gestfuse/types.hpp"

namespace gestfuse {

// Session manifest JSON:
//   {subject, session, events_file, emg_file, aps_dir?,
//    annotations: [{label, start_us, end_us}]}
// Paths are resolved relative to the manifest's directory. Annotations are
// sorted by start time and must be disjoint.
SessionManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const SessionManifest& manifest);

// Opens every stream named by the manifest. All three modalities share the
// session-relative clock their files already carry (the recording rig
// restarts the camera timestamp at every session, so time zero is aligned
// across streams by construction). APS frames are read from `aps_dir` as
// 8-bit PGM files whose stem is the capture timestamp in microseconds.
Session load_session(const std::filesystem::path& manifest_path);

// Tiles every annotated gesture interval with consecutive windows of
// window_ms milliseconds, starting at the interval start; a trailing
// partial window is discarded. Window indices are global and strictly
// increasing across the session. Rest gaps between annotations yield no
// windows.
std::vector<SyncWindow> window_slices(const Session& session, int window_ms);

// Tiles [0, t_max] of a bare stream with unlabeled windows (used by the
// inspect command when no annotations are available).
std::vector<SyncWindow> window_slices_unlabeled(const Session& session, int window_ms);

}  // namespace gestfuse
