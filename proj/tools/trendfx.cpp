#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "trendfx/config.hpp"
#include "trendfx/data.hpp"
#include "trendfx/experiment.hpp"
#include "trendfx/l1tf.hpp"
#include "trendfx/report.hpp"

namespace fs = std::filesystem;
using namespace trendfx;

namespace {

fs::path default_output_dir() {
  if (const char* env = std::getenv("TRENDFX_OUTPUT_DIR"); env && *env) return env;
  return "trendfx-out";
}

// A single numeric column, with or without a header line.
std::vector<double> read_column(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data::MissingFileError("cannot open " + path.string());
  std::vector<double> y;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string cell = line.substr(comma == std::string::npos ? 0 : comma + 1);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') {
      if (row == 1) continue;
      throw data::ParseError(path.string() + ":" + std::to_string(row) + ": '" + cell + "' is not a number");
    }
    y.push_back(v);
  }
  return y;
}

int run_filter(const fs::path& input, const fs::path& output, double lambda, const l1tf::SolverOptions& opts) {
  const auto y = read_column(input);
  const auto sol = l1tf::solve(y, lambda, opts);
  std::ofstream out(output);
  if (!out) throw Error("cannot write " + output.string());
  out.precision(17);
  out << "t,y,x,residual\n";
  for (std::size_t t = 0; t < y.size(); ++t) out << t << ',' << y[t] << ',' << sol.x[t] << ',' << sol.residual[t] << '\n';
  std::cerr << "l1tf: n=" << y.size() << " iterations=" << sol.iterations << " kkt=" << sol.kkt_residual
            << (sol.converged ? "" : " (not converged)") << '\n';
  return sol.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L1 trend filtering features for multivariate forecasting"};
  app.require_subcommand(1);

  auto* filter = app.add_subcommand("filter", "Trend-filter one column of numbers");
  fs::path filter_in, filter_out;
  double filter_lambda = 0.005;
  l1tf::SolverOptions filter_opts;
  filter->add_option("input", filter_in, "CSV with one value column")->required();
  filter->add_option("-o,--output", filter_out, "Output CSV (t,y,x,residual)")->required();
  filter->add_option("-l,--lambda", filter_lambda, "Penalty weight")->check(CLI::NonNegativeNumber);
  filter->add_option("--tolerance", filter_opts.tolerance, "Optimality tolerance");
  filter->add_option("--max-iterations", filter_opts.max_iterations, "Iteration cap");

  auto* synth = app.add_subcommand("synth", "Write a synthetic market CSV");
  fs::path synth_out;
  std::string synth_config;
  std::vector<std::string> synth_sets;
  synth->add_option("-o,--output", synth_out, "Output CSV")->required();
  synth->add_option("-c,--config", synth_config, "Config file ([synth] section is used)");
  synth->add_option("--set", synth_sets, "Override, e.g. synth.seed=3");
  std::size_t synth_length = 0;
  std::uint64_t synth_seed = 0;
  auto* synth_length_opt = synth->add_option("--length", synth_length, "Number of rows");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "Generator seed");

  auto* run = app.add_subcommand("run", "Run the with/without trend experiment");
  std::string run_config;
  std::vector<std::string> run_sets;
  fs::path run_out;
  std::string run_format = "both";
  run->add_option("-c,--config", run_config, "Config file");
  run->add_option("--set", run_sets, "Override any key, e.g. train.epochs=5");
  run->add_option("-o,--output-dir", run_out, "Output directory (default $TRENDFX_OUTPUT_DIR)");
  run->add_option("--format", run_format, "json, table or both")->check(CLI::IsMember({"json", "table", "both"}));
  double run_lambda = 0;
  std::uint64_t run_seed = 0;
  std::size_t run_epochs = 0;
  std::string run_families;
  auto* run_lambda_opt = run->add_option("--lambda", run_lambda, "Same as l1tf.lambda");
  auto* run_seed_opt = run->add_option("--seed", run_seed, "Same as train.seed");
  auto* run_epochs_opt = run->add_option("--epochs", run_epochs, "Same as train.epochs");
  auto* run_families_opt = run->add_option("--families", run_families, "Same as models.families");

  auto* rep = app.add_subcommand("report", "Print a saved report");
  fs::path rep_in;
  std::string rep_format = "table";
  rep->add_option("input", rep_in, "report.json")->required();
  rep->add_option("--format", rep_format, "table or json")->check(CLI::IsMember({"table", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*filter) return run_filter(filter_in, filter_out, filter_lambda, filter_opts);

    if (*synth) {
      auto sets = synth_sets;
      if (*synth_length_opt) sets.push_back("synth.length=" + std::to_string(synth_length));
      if (*synth_seed_opt) sets.push_back("synth.seed=" + std::to_string(synth_seed));
      const auto cfg = synth_config.empty() ? cli::with_overrides({}, sets) : cli::load_config(synth_config, sets);
      data::write_csv(synth_out, data::synth_generate(cfg.synth));
      return 0;
    }

    if (*run) {
      auto sets = run_sets;
      if (*run_lambda_opt) {
        std::ostringstream os;
        os.precision(17);
        os << run_lambda;
        sets.push_back("l1tf.lambda=" + os.str());
      }
      if (*run_seed_opt) sets.push_back("train.seed=" + std::to_string(run_seed));
      if (*run_epochs_opt) sets.push_back("train.epochs=" + std::to_string(run_epochs));
      if (*run_families_opt) sets.push_back("models.families=" + run_families);
      auto cfg = run_config.empty() ? cli::with_overrides({}, sets) : cli::load_config(run_config, sets);
      if (!run_out.empty()) cfg.output_dir = run_out;
      if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();

      const auto result = cli::run_experiment(cfg);
      const auto& meta = result.report.metadata;
      if (meta.l1tf_nonconverged > 0) {
        std::cerr << "warning: " << meta.l1tf_nonconverged << " of " << meta.l1tf_solves
                  << " trend filter solves did not converge\n";
      }
      if (run_format != "table") cli::emit_report(result.report, cfg.output_dir, cli::ReportFormat::Json);
      if (run_format != "json") cli::emit_report(result.report, cfg.output_dir, cli::ReportFormat::Table);
      if (cfg.plots) cli::emit_plot_data(result, cfg.output_dir);
      std::cout << cli::render_table(result.report);
      std::cerr << "wrote " << cfg.output_dir.string() << " (" << meta.wall_seconds << " s)\n";
      return 0;
    }

    if (*rep) {
      const auto report = cli::load_report(rep_in);
      std::cout << (rep_format == "json" ? cli::report_to_json(report) + "\n" : cli::render_table(report));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
