#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trendfx/forecaster.hpp"

namespace trendfx::models {

/// Gate weights act on the concatenation [h_{t-1}; x_t].
struct LstmParams {
  std::size_t hidden = 0;
  std::size_t input = 0;
  ad::Tensor w_forget, w_input, w_output, w_state;  // [hidden, hidden + input]
  ad::Tensor b_forget, b_input, b_output, b_state;  // [hidden]

  static LstmParams init(std::size_t hidden, std::size_t input, std::uint64_t seed, const std::string& prefix);
  void append_to(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

struct LstmState {
  ad::Tensor h;  // [batch, hidden]
  ad::Tensor s;  // [batch, hidden] memory cell

  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

/// One LSTM step for a batch: x is [batch, input].
LstmState lstm_step(const ad::Tensor& x, const LstmState& prev, const LstmParams& p);

}  // namespace trendfx::models
