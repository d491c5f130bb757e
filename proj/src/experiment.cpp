#include "trendfx/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "trendfx/arima.hpp"
#include "trendfx/forecaster.hpp"
#include "trendfx/lookahead.hpp"
#include "trendfx/train.hpp"

namespace trendfx::cli {
namespace {

const std::string& display_name(const std::string& family) {
  static const std::map<std::string, std::string> names{
      {"lookahead", "Lookahead"}, {"arima", "ARIMA"}, {"fcn", "FCN"}, {"darnn", "DA-RNN"}, {"dsanet", "DSANet"}};
  auto it = names.find(family);
  return it == names.end() ? family : it->second;
}

// Test-region quantities shared by every cell, in original units.
struct TestFrame {
  std::vector<double> decision;  // y_T of each test window
  std::vector<double> actual;    // y at the last output step
  std::vector<std::int64_t> t;   // timestamp of the actual value
  double close = 0.0;
};

BacktestSummary summarize(const eval::BacktestResult& r) {
  return {r.initial_balance, r.balance, r.stocks_held, r.close_price, r.rate_of_return, r.trades.size()};
}

void score(CellResult& cell, const TestFrame& frame, const std::vector<double>& predicted,
           const ExperimentConfig& config, std::vector<PredictionTrace>& traces) {
  cell.metrics = eval::evaluate(frame.actual, predicted);
  cell.backtest = summarize(eval::backtest(frame.decision, predicted, config.backtest, frame.close));
  cell.ok = true;
  traces.push_back({cell.label(), frame.t, frame.actual, predicted});
}

std::vector<data::Window> thin(std::vector<data::Window> windows, std::size_t limit) {
  if (limit == 0 || windows.size() <= limit) return windows;
  std::vector<data::Window> out;
  out.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) out.push_back(std::move(windows[i * windows.size() / limit]));
  return out;
}

std::vector<double> pair_errors(const eval::MetricReport& m, PairedErrors kind) {
  std::vector<double> e = m.abs_errors;
  if (kind == PairedErrors::Squared) {
    for (auto& v : e) v *= v;
  }
  return e;
}

}  // namespace

std::string CellResult::label() const {
  return display_name(model) + (trend ? "+L1TF" : "");
}

const CellResult* ExperimentReport::find(const std::string& model, bool trend) const {
  for (const auto& c : cells) {
    if (c.model == model && c.trend == trend) return &c;
  }
  return nullptr;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  validate(config);

  const data::MultivariateSeries series =
      config.csv_path.empty() ? data::synth_generate(config.synth) : data::load_csv(config.csv_path, config.schema);
  const auto [train_raw, test_raw] = data::train_test_split(series, config.train_fraction);
  const std::size_t T_i = config.input_steps;
  const std::size_t T_o = config.output_steps;
  data::window_count(train_raw.length(), T_i, T_o, config.stride);
  data::window_count(test_raw.length(), T_i, T_o, config.stride);

  const data::Scaler scaler = data::fit_scaler(train_raw);
  const auto train_scaled = data::apply_scaler(scaler, train_raw);
  const auto test_scaled = data::apply_scaler(scaler, test_raw);
  const auto train_windows = thin(data::make_windows(train_scaled, T_i, T_o, config.stride), config.max_train_windows);
  const auto test_windows = data::make_windows(test_scaled, T_i, T_o, config.stride);

  ExperimentOutput output;
  auto& report = output.report;
  auto& meta = report.metadata;
  meta.seed = config.train.seed;
  meta.config_hash = config_hash(config);
  meta.series_length = series.length();
  meta.train_length = train_raw.length();
  meta.test_length = test_raw.length();
  meta.train_windows = train_windows.size();
  meta.test_windows = test_windows.size();
  meta.paired_errors = to_string(config.paired_errors);

  TestFrame frame;
  for (const auto& w : test_windows) {
    const std::size_t decision = w.origin_index + T_i - 1;
    const std::size_t target = decision + T_o;
    frame.decision.push_back(test_raw.target()[decision]);
    frame.actual.push_back(test_raw.target()[target]);
    frame.t.push_back(test_raw.timestamps()[target]);
  }
  frame.close = frame.actual.back();

  const bool with_trend = config.trend_mode != TrendMode::Off;
  const bool without_trend = config.trend_mode == TrendMode::Off || config.compare;
  std::vector<data::Window> train_aug, test_aug;
  std::vector<std::size_t> sources;
  const bool any_neural = std::any_of(config.families.begin(), config.families.end(), [](const std::string& f) {
    return f == "fcn" || f == "darnn" || f == "dsanet";
  });
  if (with_trend && any_neural) {
    const auto mode = config.trend_mode == TrendMode::All ? l1tf::AugmentMode::AllChannels : l1tf::AugmentMode::TargetOnly;
    sources = l1tf::trend_sources(series.n_channels(), mode);
    l1tf::AugmentStats stats;
    if (config.trend_scope == TrendScope::Window) {
      train_aug = l1tf::augment_with_trend(train_windows, config.lambda, mode, config.solver, &stats);
      test_aug = l1tf::augment_with_trend(test_windows, config.lambda, mode, config.solver, &stats);
    } else {
      train_aug = l1tf::augment_with_series_trend(train_windows, train_scaled, config.lambda, mode, config.solver, &stats);
      test_aug = l1tf::augment_with_series_trend(test_windows, test_scaled, config.lambda, mode, config.solver, &stats);
    }
    meta.l1tf_solves = stats.solves;
    meta.l1tf_nonconverged = stats.nonconverged;
  }

  for (const auto& family : config.families) {
    if (family == "lookahead") {
      CellResult cell;
      cell.model = family;
      try {
        std::vector<int> signals(frame.decision.size());
        for (std::size_t i = 0; i < signals.size(); ++i) {
          signals[i] = (frame.actual[i] > frame.decision[i]) - (frame.actual[i] < frame.decision[i]);
        }
        cell.metrics = eval::evaluate(frame.actual, frame.decision);
        cell.backtest = summarize(eval::backtest_signals(frame.decision, signals, config.backtest, frame.close));
        cell.ok = true;
        output.predictions.push_back({cell.label(), frame.t, frame.actual, frame.decision});
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      report.cells.push_back(std::move(cell));
      continue;
    }
    if (family == "arima") {
      CellResult cell;
      cell.model = family;
      try {
        const auto model = models::arima_fit(train_raw.target(), config.arima_p, config.arima_q);
        std::vector<double> predicted;
        predicted.reserve(test_windows.size());
        for (const auto& w : test_windows) {
          const auto history = std::span(test_raw.target()).subspan(w.origin_index, T_i);
          predicted.push_back(models::arima_forecast(model, history, T_o).back());
        }
        cell.parameter_count = 1 + model.phi.size() + model.theta.size();
        score(cell, frame, predicted, config, output.predictions);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      report.cells.push_back(std::move(cell));
      continue;
    }

    for (const bool trend : {false, true}) {
      if ((trend && !with_trend) || (!trend && !without_trend)) continue;
      CellResult cell;
      cell.model = family;
      cell.trend = trend;
      try {
        models::ModelConfig mc;
        mc.family = family;
        mc.input_steps = T_i;
        mc.output_steps = T_o;
        mc.layout.n_drivers = series.n_drivers();
        if (trend) mc.layout.trend_sources = sources;
        mc.seed = config.train.seed;
        mc.encoder_hidden = config.encoder_hidden;
        mc.decoder_hidden = config.decoder_hidden;
        mc.dsanet_filters = config.dsanet_filters;
        mc.local_kernel = config.local_kernel;
        mc.n_head = config.n_head;
        mc.ffn_dim = config.ffn_dim;
        mc.ar_window = config.ar_window;
        mc.fcn_filters = config.fcn_filters;
        mc.fcn_kernels = config.fcn_kernels;
        auto model = models::make_model(mc);
        const auto& train_set = trend ? train_aug : train_windows;
        const auto& test_set = trend ? test_aug : test_windows;
        cell.loss_curve = models::train(*model, train_set, config.train).loss_curve;
        cell.parameter_count = model->parameter_count();
        const auto raw = model->predict_all(test_set);
        std::vector<double> predicted;
        predicted.reserve(raw.size());
        for (const auto& p : raw) {
          const double v = scaler.invert(0, p.back());
          if (!std::isfinite(v)) throw models::TrainingDivergedError(family + ": non-finite forecast");
          predicted.push_back(v);
        }
        score(cell, frame, predicted, config, output.predictions);
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      report.cells.push_back(std::move(cell));
    }

    if (with_trend && without_trend) {
      Comparison cmp;
      cmp.model = family;
      const auto* a = report.find(family, true);
      const auto* b = report.find(family, false);
      if (a && b && a->ok && b->ok) {
        cmp.rmse_with = a->metrics.rmse;
        cmp.rmse_without = b->metrics.rmse;
        try {
          cmp.test = eval::paired_t_test(pair_errors(a->metrics, config.paired_errors),
                                         pair_errors(b->metrics, config.paired_errors));
          cmp.ok = true;
        } catch (const std::exception& e) {
          cmp.error = e.what();
        }
      } else {
        cmp.error = "a compared cell failed";
      }
      report.comparisons.push_back(std::move(cmp));
    }
  }

  if (config.plots) {
    const auto& target = series.target();
    std::vector<double> scaled(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) scaled[i] = scaler.apply(0, target[i]);
    const auto sol = l1tf::solve(scaled, config.lambda, config.solver);
    TrendTrace trace{series.names().front(), series.timestamps(), target, {}};
    trace.trend.reserve(target.size());
    for (double v : sol.x) trace.trend.push_back(scaler.invert(0, v));
    output.trends.push_back(std::move(trace));
  }

  meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return output;
}

}  // namespace trendfx::cli
