#pragma once

#include <filesystem>
#include <iosfwd>

#include "gestfuse/types.hpp"

namespace gestfuse {

// Canonical EMG import format: UTF-8 CSV with one header row
// `t_us,ch0,..,ch{C-1}` followed by numeric rows with non-decreasing
// integer microsecond timestamps. Raw amplitudes are kept as-is, no
// rescaling. The sample rate is inferred from the mean row spacing
// (200 Hz when the file has fewer than two rows).
EmgRecording parse_emg_csv(std::istream& in);
EmgRecording read_emg_csv(const std::filesystem::path& path);

void write_emg_csv(std::ostream& out, const EmgRecording& rec);
void write_emg_csv(const std::filesystem::path& path, const EmgRecording& rec);

}  // namespace gestfuse
