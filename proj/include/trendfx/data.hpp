#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trendfx/error.hpp"

namespace trendfx::data {

class DataError : public Error {
 public:
  using Error::Error;
};
class MissingFileError : public DataError {
 public:
  using DataError::DataError;
};
class ParseError : public DataError {
 public:
  using DataError::DataError;
};
class MissingCellError : public DataError {
 public:
  using DataError::DataError;
};
class NonMonotoneTimestampError : public DataError {
 public:
  using DataError::DataError;
};
class MissingColumnError : public DataError {
 public:
  using DataError::DataError;
};

/// Target series plus n driving series sharing one strictly increasing
/// timestamp axis (epoch minutes). Channel 0 is always the target.
class MultivariateSeries {
 public:
  MultivariateSeries() = default;
  MultivariateSeries(std::vector<std::int64_t> timestamps, std::vector<double> target,
                     std::vector<std::vector<double>> drivers, std::vector<std::string> names);

  std::size_t length() const { return timestamps_.size(); }
  std::size_t n_drivers() const { return drivers_.size(); }
  std::size_t n_channels() const { return drivers_.size() + 1; }

  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
  const std::vector<double>& target() const { return target_; }
  const std::vector<std::vector<double>>& drivers() const { return drivers_; }
  const std::vector<std::string>& names() const { return names_; }

  // Channel 0 is the target, 1..n the drivers.
  std::span<const double> channel(std::size_t c) const;

  MultivariateSeries slice(std::size_t begin, std::size_t end) const;

  bool operator==(const MultivariateSeries&) const = default;

 private:
  std::vector<std::int64_t> timestamps_;
  std::vector<double> target_;
  std::vector<std::vector<double>> drivers_;
  std::vector<std::string> names_;
};

/// One supervised sample. `inputs` is row-major channels x input_steps.
struct Window {
  std::size_t channels = 0;
  std::size_t input_steps = 0;
  std::vector<double> inputs;
  std::vector<double> targets;
  std::size_t origin_index = 0;

  std::span<const double> channel(std::size_t c) const {
    return {inputs.data() + c * input_steps, input_steps};
  }
  std::span<double> channel(std::size_t c) { return {inputs.data() + c * input_steps, input_steps}; }
  std::size_t output_steps() const { return targets.size(); }
  // Value of the target channel at the last input step (the decision price).
  double last_target_input() const { return inputs[input_steps - 1]; }
};

/// Per-channel z-score transform.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  double apply(std::size_t channel, double v) const { return (v - mean[channel]) / scale[channel]; }
  double invert(std::size_t channel, double v) const { return v * scale[channel] + mean[channel]; }
};

struct SynthSpec {
  std::size_t length = 4000;
  std::size_t n_drivers = 3;
  std::size_t knot_count = 20;
  double noise_std = 1.0;
  double slope_min = -0.2;
  double slope_max = 0.2;
  double base_level = 100.0;
  // Drivers are stationary AR(1) processes with this coefficient.
  double driver_ar = 0.9;
  std::vector<double> driver_coupling;  // empty means all zeros
  std::uint64_t seed = 1;
  bool operator==(const SynthSpec&) const = default;
};

/// Generated series together with the components it was assembled from.
struct SynthResult {
  MultivariateSeries series;
  std::vector<double> trend;
  std::vector<double> coupling;
  std::vector<double> noise;
  std::vector<std::size_t> knots;
};

struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string target_column;               // empty: second column
  std::vector<std::string> driver_columns;  // empty: every remaining column
  bool operator==(const CsvSchema&) const = default;
};

MultivariateSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
void write_csv(const std::filesystem::path& path, const MultivariateSeries& series);

std::pair<MultivariateSeries, MultivariateSeries> train_test_split(const MultivariateSeries& series,
                                                                   double train_fraction);

Scaler fit_scaler(const MultivariateSeries& train);
MultivariateSeries apply_scaler(const Scaler& scaler, const MultivariateSeries& series);
MultivariateSeries invert_scaler(const Scaler& scaler, const MultivariateSeries& series);

/// Number of windows make_windows would produce; throws when T_i + T_o > N.
std::size_t window_count(std::size_t length, std::size_t input_steps, std::size_t output_steps,
                         std::size_t stride);

std::vector<Window> make_windows(const MultivariateSeries& series, std::size_t input_steps,
                                 std::size_t output_steps, std::size_t stride = 1);

SynthResult synth_generate_components(const SynthSpec& spec);
MultivariateSeries synth_generate(const SynthSpec& spec);

}  // namespace trendfx::data
