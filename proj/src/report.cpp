#include "trendfx/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace trendfx::cli {
namespace {

using nlohmann::json;

// JSON has no infinities; degenerate t statistics are stored as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw Error("report: '" + s + "' is not a number");
}

json to_json(const CellResult& c) {
  json j = {{"model", c.model}, {"trend", c.trend}, {"status", c.ok ? "ok" : "failed"}};
  if (!c.ok) {
    j["error"] = c.error;
    return j;
  }
  j["metrics"] = {{"rmse", c.metrics.rmse},
                  {"mae", c.metrics.mae},
                  {"mape", c.metrics.mape},
                  {"n_samples", c.metrics.n_samples},
                  {"abs_errors", c.metrics.abs_errors}};
  j["backtest"] = {{"initial_balance", c.backtest.initial_balance},
                   {"final_balance", c.backtest.final_balance},
                   {"stocks_held", c.backtest.stocks_held},
                   {"close_price", c.backtest.close_price},
                   {"rate_of_return", c.backtest.rate_of_return},
                   {"trades", c.backtest.trades}};
  j["loss_curve"] = c.loss_curve;
  j["parameter_count"] = c.parameter_count;
  return j;
}

CellResult cell_from_json(const json& j) {
  CellResult c;
  j.at("model").get_to(c.model);
  j.at("trend").get_to(c.trend);
  c.ok = j.at("status").get<std::string>() == "ok";
  if (!c.ok) {
    c.error = j.value("error", "");
    return c;
  }
  const auto& m = j.at("metrics");
  c.metrics.rmse = m.at("rmse").get<double>();
  c.metrics.mae = m.at("mae").get<double>();
  c.metrics.mape = m.at("mape").get<double>();
  m.at("n_samples").get_to(c.metrics.n_samples);
  m.at("abs_errors").get_to(c.metrics.abs_errors);
  const auto& b = j.at("backtest");
  b.at("initial_balance").get_to(c.backtest.initial_balance);
  b.at("final_balance").get_to(c.backtest.final_balance);
  b.at("stocks_held").get_to(c.backtest.stocks_held);
  b.at("close_price").get_to(c.backtest.close_price);
  b.at("rate_of_return").get_to(c.backtest.rate_of_return);
  b.at("trades").get_to(c.backtest.trades);
  j.at("loss_curve").get_to(c.loss_curve);
  j.at("parameter_count").get_to(c.parameter_count);
  return c;
}

json to_json(const Comparison& c) {
  json j = {{"model", c.model}, {"status", c.ok ? "ok" : "failed"}};
  if (!c.ok) {
    j["error"] = c.error;
    return j;
  }
  j["rmse_with"] = c.rmse_with;
  j["rmse_without"] = c.rmse_without;
  j["t_statistic"] = number(c.test.t_statistic);
  j["p_value"] = c.test.p_value;
  j["n_pairs"] = c.test.n_pairs;
  j["mean_difference"] = c.test.mean_difference;
  j["degenerate"] = c.test.degenerate;
  return j;
}

Comparison comparison_from_json(const json& j) {
  Comparison c;
  j.at("model").get_to(c.model);
  c.ok = j.at("status").get<std::string>() == "ok";
  if (!c.ok) {
    c.error = j.value("error", "");
    return c;
  }
  j.at("rmse_with").get_to(c.rmse_with);
  j.at("rmse_without").get_to(c.rmse_without);
  c.test.t_statistic = number(j.at("t_statistic"));
  j.at("p_value").get_to(c.test.p_value);
  j.at("n_pairs").get_to(c.test.n_pairs);
  j.at("mean_difference").get_to(c.test.mean_difference);
  j.at("degenerate").get_to(c.test.degenerate);
  return c;
}

std::string display(const std::string& model) {
  CellResult c;
  c.model = model;
  return c.label();
}

}  // namespace

std::string report_to_json(const ExperimentReport& r) {
  const auto& m = r.metadata;
  json doc;
  doc["metadata"] = {{"seed", m.seed},
                     {"config_hash", m.config_hash},
                     {"wall_seconds", m.wall_seconds},
                     {"series_length", m.series_length},
                     {"train_length", m.train_length},
                     {"test_length", m.test_length},
                     {"train_windows", m.train_windows},
                     {"test_windows", m.test_windows},
                     {"l1tf_solves", m.l1tf_solves},
                     {"l1tf_nonconverged", m.l1tf_nonconverged},
                     {"paired_errors", m.paired_errors}};
  doc["cells"] = json::array();
  for (const auto& c : r.cells) doc["cells"].push_back(to_json(c));
  doc["comparisons"] = json::array();
  for (const auto& c : r.comparisons) doc["comparisons"].push_back(to_json(c));
  return doc.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ExperimentReport r;
    const auto& m = doc.at("metadata");
    m.at("seed").get_to(r.metadata.seed);
    m.at("config_hash").get_to(r.metadata.config_hash);
    m.at("wall_seconds").get_to(r.metadata.wall_seconds);
    m.at("series_length").get_to(r.metadata.series_length);
    m.at("train_length").get_to(r.metadata.train_length);
    m.at("test_length").get_to(r.metadata.test_length);
    m.at("train_windows").get_to(r.metadata.train_windows);
    m.at("test_windows").get_to(r.metadata.test_windows);
    m.at("l1tf_solves").get_to(r.metadata.l1tf_solves);
    m.at("l1tf_nonconverged").get_to(r.metadata.l1tf_nonconverged);
    m.at("paired_errors").get_to(r.metadata.paired_errors);
    for (const auto& c : doc.at("cells")) r.cells.push_back(cell_from_json(c));
    for (const auto& c : doc.at("comparisons")) r.comparisons.push_back(comparison_from_json(c));
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
}

ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

std::string render_table(const ExperimentReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %12s %12s %10s %10s\n", "Model", "RMSE", "MAE", "MAPE(%)", "RoR(%)");
  out << line;
  for (const auto& c : r.cells) {
    if (c.ok) {
      std::snprintf(line, sizeof line, "%-16s %12.4f %12.4f %10.4f %10.2f\n", c.label().c_str(), c.metrics.rmse,
                    c.metrics.mae, c.metrics.mape * 100.0, c.backtest.rate_of_return);
    } else {
      std::snprintf(line, sizeof line, "%-16s FAILED: %s\n", c.label().c_str(), c.error.c_str());
    }
    out << line;
  }
  if (!r.comparisons.empty()) {
    out << "\nPaired t-test, " << r.metadata.paired_errors << " errors (w/ vs w/o L1TF)\n";
    std::snprintf(line, sizeof line, "%-16s %12s %12s %10s\n", "Model", "w/ RMSE", "w/o RMSE", "p-value");
    out << line;
    for (const auto& c : r.comparisons) {
      if (c.ok) {
        std::snprintf(line, sizeof line, "%-16s %12.4f %12.4f %10.4f%s\n", display(c.model).c_str(), c.rmse_with,
                      c.rmse_without, c.test.p_value, c.test.p_value < 0.05 ? " *" : "");
      } else {
        std::snprintf(line, sizeof line, "%-16s FAILED: %s\n", display(c.model).c_str(), c.error.c_str());
      }
      out << line;
    }
    out << "* p < 0.05\n";
  }
  return out.str();
}

std::filesystem::path emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                                  ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / (format == ReportFormat::Json ? "report.json" : "report.txt");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << (format == ReportFormat::Json ? report_to_json(report) + "\n" : render_table(report));
  if (!out) throw Error("failed writing " + path.string());
  return path;
}

std::size_t emit_plot_data(const ExperimentOutput& output, const std::filesystem::path& dir) {
  std::size_t files = 0;
  auto open = [&](const std::filesystem::path& sub, const std::string& name) {
    std::filesystem::create_directories(dir / sub);
    std::string safe = name;
    for (auto& ch : safe) {
      if (ch == '+') ch = '_';
    }
    const auto path = dir / sub / (safe + ".csv");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    ++files;
    return out;
  };
  for (const auto& p : output.predictions) {
    auto out = open("predictions", p.label);
    out << "t,actual,predicted\n";
    for (std::size_t i = 0; i < p.t.size(); ++i) out << p.t[i] << ',' << p.actual[i] << ',' << p.predicted[i] << '\n';
  }
  for (const auto& s : output.trends) {
    auto out = open("trend", s.name);
    out << "t,raw,trend\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) out << s.t[i] << ',' << s.raw[i] << ',' << s.trend[i] << '\n';
  }
  return files;
}

}  // namespace trendfx::cli
