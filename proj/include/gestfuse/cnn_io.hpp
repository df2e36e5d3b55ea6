#pragma once

#include <filesystem>
#include <string>

#include "gestfuse/cnn.hpp"

namespace gestfuse {

// Architecture-only JSON descriptor (kind, modality, input shape, layers);
// the inverse rebuilds a skeleton with zeroed parameters.
std::string cnn_descriptor_json(const CnnModel& model);
CnnModel cnn_from_descriptor_json(const std::string& json_text);

// Binary container round trip (see fgcn.hpp for the layout). Parameter blobs
// appear in the model's parameter order: per layer, weights then biases.
void save_cnn(const std::filesystem::path& path, const CnnModel& model);
CnnModel load_cnn(const std::filesystem::path& path);

// Human-readable full dump: the descriptor plus every parameter value.
// cnn_from_json accepts exactly what cnn_to_json produces.
std::string cnn_to_json(const CnnModel& model);
CnnModel cnn_from_json(const std::string& json_text);

}  // namespace gestfuse
