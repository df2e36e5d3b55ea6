#include "gestfuse/cnn_io.hpp"

#include <json.hpp>

#include "gestfuse/error.hpp"
#include "gestfuse/fgcn.hpp"

namespace gestfuse {

namespace {

using nlohmann::json;

std::string kind_name(LayerSpec::Kind kind) {
  switch (kind) {
    case LayerSpec::Kind::conv2d: return "conv2d";
    case LayerSpec::Kind::conv1d: return "conv1d";
    case LayerSpec::Kind::maxpool2d: return "maxpool2d";
    case LayerSpec::Kind::dense: return "dense";
    case LayerSpec::Kind::relu: return "relu";
    case LayerSpec::Kind::softmax: return "softmax";
  }
  raise(Errc::bad_config, "unknown layer kind");
}

LayerSpec::Kind kind_from_name(const std::string& name) {
  if (name == "conv2d") return LayerSpec::Kind::conv2d;
  if (name == "conv1d") return LayerSpec::Kind::conv1d;
  if (name == "maxpool2d") return LayerSpec::Kind::maxpool2d;
  if (name == "dense") return LayerSpec::Kind::dense;
  if (name == "relu") return LayerSpec::Kind::relu;
  if (name == "softmax") return LayerSpec::Kind::softmax;
  raise(Errc::io_error, "unknown layer kind '" + name + "'");
}

json spec_to_json(const LayerSpec& spec) {
  json j;
  j["kind"] = kind_name(spec.kind);
  switch (spec.kind) {
    case LayerSpec::Kind::conv2d:
    case LayerSpec::Kind::conv1d:
      j["in_channels"] = spec.in_channels;
      j["out_channels"] = spec.out_channels;
      j["kernel"] = spec.kernel;
      break;
    case LayerSpec::Kind::dense:
      j["in_dim"] = spec.in_dim;
      j["out_dim"] = spec.out_dim;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec spec_from_json(const json& j) {
  LayerSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  switch (spec.kind) {
    case LayerSpec::Kind::conv2d:
    case LayerSpec::Kind::conv1d:
      spec.in_channels = j.at("in_channels").get<int>();
      spec.out_channels = j.at("out_channels").get<int>();
      spec.kernel = j.at("kernel").get<int>();
      break;
    case LayerSpec::Kind::dense:
      spec.in_dim = j.at("in_dim").get<int>();
      spec.out_dim = j.at("out_dim").get<int>();
      break;
    default:
      break;
  }
  return spec;
}

json descriptor_to_json(const CnnModel& model) {
  json j;
  j["kind"] = "cnn";
  j["modality"] = model.modality();
  j["input_shape"] = model.input_shape();
  j["layers"] = json::array();
  for (const auto& layer : model.layers()) j["layers"].push_back(spec_to_json(layer->spec()));
  return j;
}

CnnModel model_from_descriptor(const json& j) {
  if (j.at("kind").get<std::string>() != "cnn")
    raise(Errc::io_error, "descriptor is not a cnn model");
  std::vector<int> input_shape = j.at("input_shape").get<std::vector<int>>();
  std::vector<LayerSpec> specs;
  for (const json& layer : j.at("layers")) specs.push_back(spec_from_json(layer));
  return build_cnn(std::move(input_shape), specs, j.at("modality").get<std::string>());
}

json parse_or_raise(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::io_error, "invalid JSON in model descriptor");
  return j;
}

void fill_parameters(CnnModel& model, std::span<const std::vector<double>> blobs) {
  const auto params = model.parameters();
  if (blobs.size() != params.size())
    raise(Errc::io_error, "container holds " + std::to_string(blobs.size()) +
                              " parameter blobs, model needs " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (blobs[i].size() != params[i]->data.size())
      raise(Errc::io_error, "parameter blob " + std::to_string(i) + " holds " +
                                std::to_string(blobs[i].size()) + " values, expected " +
                                std::to_string(params[i]->data.size()));
    params[i]->data = blobs[i];
  }
}

std::vector<std::vector<double>> collect_parameters(const CnnModel& model) {
  std::vector<std::vector<double>> blobs;
  for (const Tensor* p : model.parameters()) blobs.push_back(p->data);
  return blobs;
}

}  // namespace

std::string cnn_descriptor_json(const CnnModel& model) {
  return descriptor_to_json(model).dump();
}

CnnModel cnn_from_descriptor_json(const std::string& json_text) {
  try {
    return model_from_descriptor(parse_or_raise(json_text));
  } catch (const json::exception& e) {
    raise(Errc::io_error, std::string("bad model descriptor: ") + e.what());
  }
}

void save_cnn(const std::filesystem::path& path, const CnnModel& model) {
  write_fgcn_file(path, cnn_descriptor_json(model), collect_parameters(model));
}

CnnModel load_cnn(const std::filesystem::path& path) {
  const FgcnContent content = read_fgcn_file(path);
  CnnModel model = cnn_from_descriptor_json(content.descriptor);
  fill_parameters(model, content.blobs);
  return model;
}

std::string cnn_to_json(const CnnModel& model) {
  json j = descriptor_to_json(model);
  j["parameters"] = collect_parameters(model);
  return j.dump(2);
}

CnnModel cnn_from_json(const std::string& json_text) {
  try {
    const json j = parse_or_raise(json_text);
    CnnModel model = model_from_descriptor(j);
    const auto blobs = j.at("parameters").get<std::vector<std::vector<double>>>();
    fill_parameters(model, blobs);
    return model;
  } catch (const json::exception& e) {
    raise(Errc::io_error, std::string("bad model JSON: ") + e.what());
  }
}

}  // namespace gestfuse
