#include "trendfx/lookahead.hpp"

#include "trendfx/error.hpp"

namespace trendfx::models {

LookaheadResult lookahead_predict(std::span<const double> prices, std::size_t horizon) {
  if (horizon == 0) throw InvalidArgument("lookahead: horizon must be positive");
  LookaheadResult r;
  r.positions.assign(prices.size(), 0);
  for (std::size_t t = 0; t + horizon < prices.size(); ++t) {
    const double move = prices[t + horizon] - prices[t];
    r.positions[t] = (move > 0) - (move < 0);
    r.predicted.push_back(prices[t]);
    r.actual.push_back(prices[t + horizon]);
  }
  return r;
}

}  // namespace trendfx::models
