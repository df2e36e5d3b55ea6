#pragma once

#include <stdexcept>
#include <string>

namespace gestfuse {

// Error codes mirror the failure modes of the public operations. Every
// condition a caller can reasonably branch on gets its own code.
enum class Errc {
  malformed_header,
  truncated_event,
  coordinate_out_of_range,
  non_monotonic_time,
  ragged_row,
  missing_file,
  overlapping_annotations,
  empty_window,
  empty_frame,
  patch_larger_than_frame,
  wrong_patch_size,
  no_aps_frames,
  dimension_mismatch,
  single_class_data,
  non_finite_feature,
  insufficient_data_for_folds,
  shape_mismatch,
  invalid_label,
  empty_dataset,
  window_index_mismatch,
  model_modality_mismatch,
  missing_model,
  io_error,
  bad_config,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gestfuse
