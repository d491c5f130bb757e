#include "trendfx/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace trendfx::models {
namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return {{"family", c.family},
          {"input_steps", c.input_steps},
          {"output_steps", c.output_steps},
          {"n_drivers", c.layout.n_drivers},
          {"trend_sources", c.layout.trend_sources},
          {"seed", c.seed},
          {"encoder_hidden", c.encoder_hidden},
          {"decoder_hidden", c.decoder_hidden},
          {"input_attention", c.input_attention},
          {"dsanet_filters", c.dsanet_filters},
          {"local_kernel", c.local_kernel},
          {"n_head", c.n_head},
          {"ffn_dim", c.ffn_dim},
          {"ar_window", c.ar_window},
          {"layer_norm_eps", c.layer_norm_eps},
          {"fcn_filters", c.fcn_filters},
          {"fcn_kernels", c.fcn_kernels}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  j.at("family").get_to(c.family);
  j.at("input_steps").get_to(c.input_steps);
  j.at("output_steps").get_to(c.output_steps);
  j.at("n_drivers").get_to(c.layout.n_drivers);
  j.at("trend_sources").get_to(c.layout.trend_sources);
  j.at("seed").get_to(c.seed);
  j.at("encoder_hidden").get_to(c.encoder_hidden);
  j.at("decoder_hidden").get_to(c.decoder_hidden);
  j.at("input_attention").get_to(c.input_attention);
  j.at("dsanet_filters").get_to(c.dsanet_filters);
  j.at("local_kernel").get_to(c.local_kernel);
  j.at("n_head").get_to(c.n_head);
  j.at("ffn_dim").get_to(c.ffn_dim);
  j.at("ar_window").get_to(c.ar_window);
  j.at("layer_norm_eps").get_to(c.layer_norm_eps);
  j.at("fcn_filters").get_to(c.fcn_filters);
  j.at("fcn_kernels").get_to(c.fcn_kernels);
  return c;
}

}  // namespace

std::string checkpoint_to_string(const NeuralForecaster& model) {
  json tensors = json::array();
  for (const auto& [name, t] : model.named_parameters()) {
    tensors.push_back({{"name", name},
                       {"shape", t.shape()},
                       {"values", std::vector<double>(t.values().begin(), t.values().end())}});
  }
  const json doc = {{"format", "trendfx-checkpoint"},
                    {"version", kCheckpointVersion},
                    {"config", config_to_json(model.config())},
                    {"tensors", tensors}};
  return doc.dump(1);
}

std::unique_ptr<NeuralForecaster> checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  if (doc.value("format", "") != "trendfx-checkpoint") throw CheckpointError("checkpoint: unknown format tag");
  if (doc.value("version", 0) != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + doc.value("version", json(0)).dump());
  }
  try {
    auto model = make_model(config_from_json(doc.at("config")));
    std::map<std::string, const json*> stored;
    for (const auto& t : doc.at("tensors")) stored[t.at("name").get<std::string>()] = &t;
    auto params = model->named_parameters();
    if (stored.size() != params.size()) {
      throw CheckpointError("checkpoint: expected " + std::to_string(params.size()) + " tensors, found " +
                            std::to_string(stored.size()));
    }
    for (auto& [name, tensor] : params) {
      auto it = stored.find(name);
      if (it == stored.end()) throw CheckpointError("checkpoint: missing tensor '" + name + "'");
      const auto shape = it->second->at("shape").get<ad::Shape>();
      const auto values = it->second->at("values").get<std::vector<double>>();
      if (shape != tensor.shape() || values.size() != tensor.numel()) {
        throw CheckpointError("checkpoint: tensor '" + name + "' has shape " + ad::to_string(shape) +
                              ", model expects " + ad::to_string(tensor.shape()));
      }
      std::copy(values.begin(), values.end(), tensor.mutable_values().begin());
    }
    return model;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const NeuralForecaster& model) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path.string());
  out << checkpoint_to_string(model) << '\n';
}

std::unique_ptr<NeuralForecaster> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("checkpoint: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace trendfx::models
