#pragma once

// Experiment configuration. Files are INI documents; every key can also be
// given as a "section.key=value" override. Unknown keys are errors.
//
//   [data]     csv, timestamp_column, target_column, driver_columns,
//              train_fraction, input_steps, output_steps, stride
//   [synth]    length, drivers, knots, noise_std, slope_min, slope_max,
//              base_level, driver_ar, coupling, seed
//   [l1tf]     lambda, mode (off|target|all), scope (window|series),
//              tolerance, max_iterations
//   [models]   families, compare
//   [darnn]    encoder_hidden, decoder_hidden
//   [dsanet]   filters, local_kernel, n_head, ffn_dim, ar_window
//   [fcn]      filters, kernels
//   [arima]    p, q
//   [train]    epochs, batch_size, lr, seed, clip_norm, max_windows
//   [eval]     paired_errors (absolute|squared)
//   [backtest] initial_balance, allow_short, cost_per_trade
//   [output]   dir, plots

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "trendfx/backtest.hpp"
#include "trendfx/data.hpp"
#include "trendfx/l1tf.hpp"
#include "trendfx/train.hpp"

namespace trendfx::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class TrendMode { Off, Target, All };
enum class TrendScope { Window, Series };
enum class PairedErrors { Absolute, Squared };

struct ExperimentConfig {
  std::string csv_path;  // empty: synthetic data
  data::CsvSchema schema;
  data::SynthSpec synth;
  double train_fraction = 0.9;
  std::size_t input_steps = 64;
  std::size_t output_steps = 5;
  std::size_t stride = 1;

  double lambda = 0.005;
  TrendMode trend_mode = TrendMode::Target;
  TrendScope trend_scope = TrendScope::Window;
  l1tf::SolverOptions solver;

  std::vector<std::string> families{"lookahead", "arima", "fcn", "darnn", "dsanet"};
  bool compare = true;  // train neural families with and without the trend channel

  std::size_t encoder_hidden = 64;
  std::size_t decoder_hidden = 64;
  std::size_t dsanet_filters = 32;
  std::size_t local_kernel = 3;
  std::size_t n_head = 8;
  std::size_t ffn_dim = 64;
  std::size_t ar_window = 8;
  std::size_t fcn_filters = 32;
  std::vector<std::size_t> fcn_kernels{7, 5, 3};
  std::size_t arima_p = 1;
  std::size_t arima_q = 0;

  models::TrainConfig train;
  std::size_t max_train_windows = 0;  // 0: all

  PairedErrors paired_errors = PairedErrors::Absolute;
  eval::BacktestConfig backtest;

  std::filesystem::path output_dir;
  bool plots = true;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides = {});
/// Applies "section.key=value" overrides to an existing config.
ExperimentConfig with_overrides(const ExperimentConfig& base, const std::vector<std::string>& overrides);
/// Canonical INI rendering; parse_config(to_ini(c)) == c.
std::string to_ini(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);
/// FNV-1a over the canonical rendering without the [output] section, as 16
/// hex digits.
std::string config_hash(const ExperimentConfig& config);

std::string to_string(TrendMode mode);
std::string to_string(TrendScope scope);
std::string to_string(PairedErrors errors);

}  // namespace trendfx::cli
