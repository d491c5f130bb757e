#pragma once

// One-unit investment model. At every step the decision price is compared
// with a forecast: a higher forecast buys one unit, a lower one sells one
// unit, a tie does nothing.

#include <cstddef>
#include <span>
#include <vector>

#include "trendfx/error.hpp"

namespace trendfx::eval {

struct BacktestConfig {
  double initial_balance = 0.0;  // <= 0: 100 x first price
  bool allow_short = true;
  double cost_per_trade = 0.0;

  bool operator==(const BacktestConfig&) const = default;
};

struct Trade {
  std::size_t step = 0;
  int side = 0;  // +1 buy, -1 sell
  double price = 0.0;

  bool operator==(const Trade&) const = default;
};

struct BacktestResult {
  double initial_balance = 0.0;
  double balance = 0.0;
  long long stocks_held = 0;
  double close_price = 0.0;
  double rate_of_return = 0.0;  // percent
  std::vector<Trade> trades;

  bool operator==(const BacktestResult&) const = default;
};

/// prices[t] is the decision price y_T at step t and predictions[t] the last
/// forecast step for that window. The open position is valued at
/// `close_price`, or at prices.back() when close_price is not positive.
BacktestResult backtest(std::span<const double> prices, std::span<const double> predictions,
                        const BacktestConfig& config = {}, double close_price = 0.0);

/// Same bookkeeping driven by explicit positions (+1 buy, -1 sell, 0 hold).
BacktestResult backtest_signals(std::span<const double> prices, std::span<const int> signals,
                                const BacktestConfig& config = {}, double close_price = 0.0);

}  // namespace trendfx::eval
