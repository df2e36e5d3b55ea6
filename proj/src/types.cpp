#include "gestfuse/types.hpp"

#include "gestfuse/error.hpp"

namespace gestfuse {

SensorGeometry geometry_for(SensorKind kind) {
  switch (kind) {
    case SensorKind::dvs128:
      return {128, 128, SensorKind::dvs128};
    case SensorKind::davis240:
      return {240, 180, SensorKind::davis240};
  }
  raise(Errc::bad_config, "unknown sensor kind");
}

const char* sensor_kind_name(SensorKind kind) {
  switch (kind) {
    case SensorKind::dvs128:
      return "DVS128";
    case SensorKind::davis240:
      return "DAVIS240";
  }
  return "?";
}

const char* gesture_name(Gesture g) {
  switch (g) {
    case Gesture::pinky:
      return "pinky";
    case Gesture::elle:
      return "elle";
    case Gesture::yo:
      return "yo";
    case Gesture::index:
      return "index";
    case Gesture::thumb:
      return "thumb";
  }
  return "?";
}

Gesture parse_gesture(const std::string& name) {
  for (int i = 0; i < kGestureCount; ++i) {
    auto g = static_cast<Gesture>(i);
    if (name == gesture_name(g)) return g;
  }
  raise(Errc::invalid_label, "unknown gesture label '" + name + "'");
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_header: return "MalformedHeader";
    case Errc::truncated_event: return "TruncatedEvent";
    case Errc::coordinate_out_of_range: return "CoordinateOutOfRange";
    case Errc::non_monotonic_time: return "NonMonotonicTime";
    case Errc::ragged_row: return "RaggedRow";
    case Errc::missing_file: return "MissingFile";
    case Errc::overlapping_annotations: return "OverlappingAnnotations";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::empty_frame: return "EmptyFrame";
    case Errc::patch_larger_than_frame: return "PatchLargerThanFrame";
    case Errc::wrong_patch_size: return "WrongPatchSize";
    case Errc::no_aps_frames: return "NoApsFrames";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::single_class_data: return "SingleClassData";
    case Errc::non_finite_feature: return "NonFiniteFeature";
    case Errc::insufficient_data_for_folds: return "InsufficientDataForFolds";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::invalid_label: return "InvalidLabel";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::window_index_mismatch: return "WindowIndexMismatch";
    case Errc::model_modality_mismatch: return "ModelModalityMismatch";
    case Errc::missing_model: return "MissingModel";
    case Errc::io_error: return "IoError";
    case Errc::bad_config: return "BadConfig";
  }
  return "Error";
}

}  // namespace gestfuse
