#include "trendfx/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace trendfx::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Reads keys from a tree and remembers which ones were consumed.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> find(const std::string& key) {
    used_.insert(key);
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }
  std::string text(const std::string& key, const std::string& fallback) { return find(key).value_or(fallback); }
  double real(const std::string& key, double fallback) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError(key + ": '" + s + "' is not a number");
    return v;
  }
  template <class T>
  T integer(const std::string& key, T fallback) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    T v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw ConfigError(key + ": '" + s + "' is not a non-negative integer");
    }
    return v;
  }
  bool flag(const std::string& key, bool fallback) {
    const auto s = text(key, "");
    if (s.empty()) return fallback;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": '" + s + "' is not a boolean");
  }
  std::vector<std::size_t> sizes(const std::string& key, std::vector<std::size_t> fallback) {
    const auto s = find(key);
    if (!s) return fallback;
    std::vector<std::size_t> out;
    for (const auto& item : split_list(*s)) {
      std::size_t v = 0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || p != item.data() + item.size()) throw ConfigError(key + ": bad entry '" + item + "'");
      out.push_back(v);
    }
    return out;
  }
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    const auto s = find(key);
    if (!s) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*s)) {
      double v = 0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || p != item.data() + item.size()) throw ConfigError(key + ": bad entry '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ConfigError("key '" + section + "' must sit inside a section");
      for (const auto& [key, value] : body) {
        if (!used_.count(section + "." + key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

ExperimentConfig from_tree(const pt::ptree& tree) {
  ExperimentConfig c;
  Reader r(tree);
  c.csv_path = r.text("data.csv", "");
  c.schema.timestamp_column = r.text("data.timestamp_column", c.schema.timestamp_column);
  c.schema.target_column = r.text("data.target_column", "");
  c.schema.driver_columns = split_list(r.text("data.driver_columns", ""));
  c.train_fraction = r.real("data.train_fraction", c.train_fraction);
  c.input_steps = r.integer("data.input_steps", c.input_steps);
  c.output_steps = r.integer("data.output_steps", c.output_steps);
  c.stride = r.integer("data.stride", c.stride);

  c.synth.length = r.integer("synth.length", c.synth.length);
  c.synth.n_drivers = r.integer("synth.drivers", c.synth.n_drivers);
  c.synth.knot_count = r.integer("synth.knots", c.synth.knot_count);
  c.synth.noise_std = r.real("synth.noise_std", c.synth.noise_std);
  c.synth.slope_min = r.real("synth.slope_min", c.synth.slope_min);
  c.synth.slope_max = r.real("synth.slope_max", c.synth.slope_max);
  c.synth.base_level = r.real("synth.base_level", c.synth.base_level);
  c.synth.driver_ar = r.real("synth.driver_ar", c.synth.driver_ar);
  c.synth.driver_coupling = r.reals("synth.coupling", c.synth.driver_coupling);
  c.synth.seed = r.integer("synth.seed", c.synth.seed);

  c.lambda = r.real("l1tf.lambda", c.lambda);
  const auto mode = r.text("l1tf.mode", "target");
  if (mode == "off") c.trend_mode = TrendMode::Off;
  else if (mode == "target") c.trend_mode = TrendMode::Target;
  else if (mode == "all") c.trend_mode = TrendMode::All;
  else throw ConfigError("l1tf.mode: expected off, target or all, got '" + mode + "'");
  const auto scope = r.text("l1tf.scope", "window");
  if (scope == "window") c.trend_scope = TrendScope::Window;
  else if (scope == "series") c.trend_scope = TrendScope::Series;
  else throw ConfigError("l1tf.scope: expected window or series, got '" + scope + "'");
  c.solver.tolerance = r.real("l1tf.tolerance", c.solver.tolerance);
  c.solver.max_iterations = r.integer("l1tf.max_iterations", c.solver.max_iterations);

  if (const auto families = r.find("models.families")) c.families = split_list(*families);
  c.compare = r.flag("models.compare", c.compare);

  c.encoder_hidden = r.integer("darnn.encoder_hidden", c.encoder_hidden);
  c.decoder_hidden = r.integer("darnn.decoder_hidden", c.decoder_hidden);
  c.dsanet_filters = r.integer("dsanet.filters", c.dsanet_filters);
  c.local_kernel = r.integer("dsanet.local_kernel", c.local_kernel);
  c.n_head = r.integer("dsanet.n_head", c.n_head);
  c.ffn_dim = r.integer("dsanet.ffn_dim", c.ffn_dim);
  c.ar_window = r.integer("dsanet.ar_window", c.ar_window);
  c.fcn_filters = r.integer("fcn.filters", c.fcn_filters);
  c.fcn_kernels = r.sizes("fcn.kernels", c.fcn_kernels);
  c.arima_p = r.integer("arima.p", c.arima_p);
  c.arima_q = r.integer("arima.q", c.arima_q);

  c.train.epochs = r.integer("train.epochs", c.train.epochs);
  c.train.batch_size = r.integer("train.batch_size", c.train.batch_size);
  c.train.lr = r.real("train.lr", c.train.lr);
  c.train.seed = r.integer("train.seed", c.train.seed);
  c.train.clip_norm = r.real("train.clip_norm", c.train.clip_norm);
  c.max_train_windows = r.integer("train.max_windows", c.max_train_windows);

  const auto paired = r.text("eval.paired_errors", "absolute");
  if (paired == "absolute") c.paired_errors = PairedErrors::Absolute;
  else if (paired == "squared") c.paired_errors = PairedErrors::Squared;
  else throw ConfigError("eval.paired_errors: expected absolute or squared, got '" + paired + "'");

  c.backtest.initial_balance = r.real("backtest.initial_balance", c.backtest.initial_balance);
  c.backtest.allow_short = r.flag("backtest.allow_short", c.backtest.allow_short);
  c.backtest.cost_per_trade = r.real("backtest.cost_per_trade", c.backtest.cost_per_trade);

  c.output_dir = r.text("output.dir", "");
  c.plots = r.flag("output.plots", c.plots);

  r.reject_unknown();
  validate(c);
  return c;
}

pt::ptree to_tree(const ExperimentConfig& c) {
  pt::ptree t;
  auto put = [&t](const std::string& key, const std::string& value) { t.put(pt::ptree::path_type(key, '.'), value); };
  put("data.csv", c.csv_path);
  put("data.timestamp_column", c.schema.timestamp_column);
  put("data.target_column", c.schema.target_column);
  put("data.driver_columns", join(c.schema.driver_columns));
  put("data.train_fraction", fmt(c.train_fraction));
  put("data.input_steps", std::to_string(c.input_steps));
  put("data.output_steps", std::to_string(c.output_steps));
  put("data.stride", std::to_string(c.stride));
  put("synth.length", std::to_string(c.synth.length));
  put("synth.drivers", std::to_string(c.synth.n_drivers));
  put("synth.knots", std::to_string(c.synth.knot_count));
  put("synth.noise_std", fmt(c.synth.noise_std));
  put("synth.slope_min", fmt(c.synth.slope_min));
  put("synth.slope_max", fmt(c.synth.slope_max));
  put("synth.base_level", fmt(c.synth.base_level));
  put("synth.driver_ar", fmt(c.synth.driver_ar));
  std::string coupling;
  for (std::size_t i = 0; i < c.synth.driver_coupling.size(); ++i) {
    coupling += (i ? "," : "") + fmt(c.synth.driver_coupling[i]);
  }
  put("synth.coupling", coupling);
  put("synth.seed", std::to_string(c.synth.seed));
  put("l1tf.lambda", fmt(c.lambda));
  put("l1tf.mode", to_string(c.trend_mode));
  put("l1tf.scope", to_string(c.trend_scope));
  put("l1tf.tolerance", fmt(c.solver.tolerance));
  put("l1tf.max_iterations", std::to_string(c.solver.max_iterations));
  put("models.families", join(c.families));
  put("models.compare", c.compare ? "true" : "false");
  put("darnn.encoder_hidden", std::to_string(c.encoder_hidden));
  put("darnn.decoder_hidden", std::to_string(c.decoder_hidden));
  put("dsanet.filters", std::to_string(c.dsanet_filters));
  put("dsanet.local_kernel", std::to_string(c.local_kernel));
  put("dsanet.n_head", std::to_string(c.n_head));
  put("dsanet.ffn_dim", std::to_string(c.ffn_dim));
  put("dsanet.ar_window", std::to_string(c.ar_window));
  put("fcn.filters", std::to_string(c.fcn_filters));
  put("fcn.kernels", join(c.fcn_kernels));
  put("arima.p", std::to_string(c.arima_p));
  put("arima.q", std::to_string(c.arima_q));
  put("train.epochs", std::to_string(c.train.epochs));
  put("train.batch_size", std::to_string(c.train.batch_size));
  put("train.lr", fmt(c.train.lr));
  put("train.seed", std::to_string(c.train.seed));
  put("train.clip_norm", fmt(c.train.clip_norm));
  put("train.max_windows", std::to_string(c.max_train_windows));
  put("eval.paired_errors", to_string(c.paired_errors));
  put("backtest.initial_balance", fmt(c.backtest.initial_balance));
  put("backtest.allow_short", c.backtest.allow_short ? "true" : "false");
  put("backtest.cost_per_trade", fmt(c.backtest.cost_per_trade));
  put("output.dir", c.output_dir.string());
  put("output.plots", c.plots ? "true" : "false");
  return t;
}

void apply(pt::ptree& tree, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not section.key=value");
    const auto key = trim(o.substr(0, eq));
    if (key.find('.') == std::string::npos) throw ConfigError("override key '" + key + "' needs a section");
    tree.put(pt::ptree::path_type(key, '.'), trim(o.substr(eq + 1)));
  }
}

}  // namespace

std::string to_string(TrendMode mode) {
  switch (mode) {
    case TrendMode::Off: return "off";
    case TrendMode::Target: return "target";
    case TrendMode::All: return "all";
  }
  return "?";
}

std::string to_string(TrendScope scope) { return scope == TrendScope::Window ? "window" : "series"; }
std::string to_string(PairedErrors errors) { return errors == PairedErrors::Absolute ? "absolute" : "squared"; }

ExperimentConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply(tree, overrides);
  return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

ExperimentConfig with_overrides(const ExperimentConfig& base, const std::vector<std::string>& overrides) {
  auto tree = to_tree(base);
  apply(tree, overrides);
  return from_tree(tree);
}

std::string to_ini(const ExperimentConfig& config) {
  std::ostringstream out;
  pt::write_ini(out, to_tree(config));
  return out.str();
}

void validate(const ExperimentConfig& c) {
  if (!(c.train_fraction > 0 && c.train_fraction < 1)) throw ConfigError("data.train_fraction must lie in (0, 1)");
  if (c.input_steps == 0 || c.output_steps == 0) throw ConfigError("data.input_steps and output_steps must be positive");
  if (c.stride == 0) throw ConfigError("data.stride must be positive");
  if (c.lambda < 0) throw ConfigError("l1tf.lambda must be non-negative");
  if (!(c.solver.tolerance > 0)) throw ConfigError("l1tf.tolerance must be positive");
  if (c.csv_path.empty() && c.synth.length == 0) throw ConfigError("synth.length must be positive");
  if (c.synth.noise_std < 0) throw ConfigError("synth.noise_std must be non-negative");
  if (c.families.empty()) throw ConfigError("models.families is empty");
  static const std::set<std::string> known{"lookahead", "arima", "fcn", "darnn", "dsanet"};
  std::set<std::string> seen;
  for (const auto& f : c.families) {
    if (!known.count(f)) throw ConfigError("models.families: unknown family '" + f + "'");
    if (!seen.insert(f).second) throw ConfigError("models.families: '" + f + "' listed twice");
  }
  if (c.train.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (!(c.train.lr > 0)) throw ConfigError("train.lr must be positive");
  if (c.n_head == 0 || c.dsanet_filters % c.n_head != 0) {
    throw ConfigError("dsanet.filters must be a positive multiple of dsanet.n_head");
  }
  if (c.fcn_kernels.empty()) throw ConfigError("fcn.kernels is empty");
  if (c.backtest.cost_per_trade < 0) throw ConfigError("backtest.cost_per_trade must be non-negative");
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig keyed = config;
  keyed.output_dir.clear();
  keyed.plots = true;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_ini(keyed)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trendfx::cli
