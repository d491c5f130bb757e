#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trendfx::models {

/// Perfect-foresight reference. At step t the position is the sign of the
/// actual move price[t + horizon] - price[t]; as a forecaster it predicts
/// price[t] for price[t + horizon].
struct LookaheadResult {
  std::vector<int> positions;      // one per price; 0 where t + horizon is past the end
  std::vector<double> predicted;   // price[t] for every t with a future value
  std::vector<double> actual;      // price[t + horizon]
};

LookaheadResult lookahead_predict(std::span<const double> prices, std::size_t horizon);

}  // namespace trendfx::models
