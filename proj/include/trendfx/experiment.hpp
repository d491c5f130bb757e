#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trendfx/backtest.hpp"
#include "trendfx/config.hpp"
#include "trendfx/metrics.hpp"
#include "trendfx/stats.hpp"

namespace trendfx::cli {

struct BacktestSummary {
  double initial_balance = 0.0;
  double final_balance = 0.0;
  long long stocks_held = 0;
  double close_price = 0.0;
  double rate_of_return = 0.0;
  std::size_t trades = 0;

  bool operator==(const BacktestSummary&) const = default;
};

/// One (model, trend feature) entry of the result matrix.
struct CellResult {
  std::string model;
  bool trend = false;
  bool ok = false;
  std::string error;
  eval::MetricReport metrics;
  BacktestSummary backtest;
  std::vector<double> loss_curve;
  std::size_t parameter_count = 0;

  std::string label() const;
  bool operator==(const CellResult&) const = default;
};

/// Paired test of a family with the trend feature (a) against without (b).
struct Comparison {
  std::string model;
  bool ok = false;
  std::string error;
  double rmse_with = 0.0;
  double rmse_without = 0.0;
  eval::PairedTestResult test;

  bool operator==(const Comparison&) const = default;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_seconds = 0.0;
  std::size_t series_length = 0;
  std::size_t train_length = 0;
  std::size_t test_length = 0;
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;
  std::size_t l1tf_solves = 0;
  std::size_t l1tf_nonconverged = 0;
  std::string paired_errors = "absolute";

  bool operator==(const RunMetadata&) const = default;
};

struct ExperimentReport {
  RunMetadata metadata;
  std::vector<CellResult> cells;
  std::vector<Comparison> comparisons;

  const CellResult* find(const std::string& model, bool trend) const;
  bool operator==(const ExperimentReport&) const = default;
};

struct PredictionTrace {
  std::string label;
  std::vector<std::int64_t> t;
  std::vector<double> actual;
  std::vector<double> predicted;
};

struct TrendTrace {
  std::string name;
  std::vector<std::int64_t> t;
  std::vector<double> raw;
  std::vector<double> trend;
};

struct ExperimentOutput {
  ExperimentReport report;
  std::vector<PredictionTrace> predictions;
  std::vector<TrendTrace> trends;
};

/// Data loading, splitting and windowing happen before any model is touched,
/// so their errors propagate; failures inside a model cell are recorded in
/// the cell.
ExperimentOutput run_experiment(const ExperimentConfig& config);

}  // namespace trendfx::cli
