#include "trendfx/backtest.hpp"

#include <string>

namespace trendfx::eval {

BacktestResult backtest_signals(std::span<const double> prices, std::span<const int> signals,
                                const BacktestConfig& config, double close_price) {
  if (prices.empty()) throw InvalidArgument("backtest: empty price series");
  if (signals.size() != prices.size()) {
    throw InvalidArgument("backtest: " + std::to_string(signals.size()) + " signals for " +
                          std::to_string(prices.size()) + " prices");
  }
  BacktestResult r;
  r.initial_balance = config.initial_balance > 0 ? config.initial_balance : 100.0 * prices.front();
  if (r.initial_balance <= 0) throw InvalidArgument("backtest: initial balance must be positive");
  r.balance = r.initial_balance;
  for (std::size_t t = 0; t < prices.size(); ++t) {
    const int side = signals[t] > 0 ? 1 : signals[t] < 0 ? -1 : 0;
    if (side == 0) continue;
    if (side < 0 && !config.allow_short && r.stocks_held <= 0) continue;
    r.balance -= side * prices[t] + config.cost_per_trade;
    r.stocks_held += side;
    r.trades.push_back({t, side, prices[t]});
  }
  r.close_price = close_price > 0 ? close_price : prices.back();
  r.rate_of_return = (r.balance - r.initial_balance + static_cast<double>(r.stocks_held) * r.close_price) /
                     r.initial_balance * 100.0;
  return r;
}

BacktestResult backtest(std::span<const double> prices, std::span<const double> predictions,
                        const BacktestConfig& config, double close_price) {
  if (predictions.size() != prices.size()) {
    throw InvalidArgument("backtest: " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(prices.size()) + " prices");
  }
  std::vector<int> signals(prices.size());
  for (std::size_t t = 0; t < prices.size(); ++t) {
    signals[t] = (predictions[t] > prices[t]) - (predictions[t] < prices[t]);
  }
  return backtest_signals(prices, signals, config, close_price);
}

}  // namespace trendfx::eval
