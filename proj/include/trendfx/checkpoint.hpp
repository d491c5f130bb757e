#pragma once

// Checkpoints are JSON documents:
//   {"format": "trendfx-checkpoint", "version": 1,
//    "config": {...ModelConfig...},
//    "tensors": [{"name": "...", "shape": [...], "values": [...]}, ...]}
// Values are written with 17 significant digits and reload bit-exactly.

#include <filesystem>
#include <memory>
#include <string>

#include "trendfx/forecaster.hpp"

namespace trendfx::models {

class CheckpointError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_string(const NeuralForecaster& model);
std::unique_ptr<NeuralForecaster> checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const NeuralForecaster& model);
std::unique_ptr<NeuralForecaster> load_checkpoint(const std::filesystem::path& path);

}  // namespace trendfx::models
