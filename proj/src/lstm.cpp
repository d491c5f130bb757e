#include "trendfx/lstm.hpp"

namespace trendfx::models {

LstmParams LstmParams::init(std::size_t hidden, std::size_t input, std::uint64_t seed, const std::string& prefix) {
  LstmParams p;
  p.hidden = hidden;
  p.input = input;
  const std::size_t fan_in = hidden + input;
  auto w = [&](const char* name) { return ad::uniform_parameter({hidden, fan_in}, fan_in, seed, prefix + name); };
  auto b = [&](const char* name) { return ad::uniform_parameter({hidden}, fan_in, seed, prefix + name); };
  p.w_forget = w("W_f");
  p.w_input = w("W_i");
  p.w_output = w("W_o");
  p.w_state = w("W_s");
  p.b_forget = b("b_f");
  p.b_input = b("b_i");
  p.b_output = b("b_o");
  p.b_state = b("b_s");
  return p;
}

void LstmParams::append_to(std::vector<NamedTensor>& out, const std::string& prefix) const {
  out.push_back({prefix + "W_f", w_forget});
  out.push_back({prefix + "W_i", w_input});
  out.push_back({prefix + "W_o", w_output});
  out.push_back({prefix + "W_s", w_state});
  out.push_back({prefix + "b_f", b_forget});
  out.push_back({prefix + "b_i", b_input});
  out.push_back({prefix + "b_o", b_output});
  out.push_back({prefix + "b_s", b_state});
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden) {
  return {ad::Tensor::zeros({batch, hidden}), ad::Tensor::zeros({batch, hidden})};
}

LstmState lstm_step(const ad::Tensor& x, const LstmState& prev, const LstmParams& p) {
  if (x.shape().size() != 2 || x.cols() != p.input) {
    throw ShapeError("lstm_step: input " + ad::to_string(x.shape()) + ", expected [batch, " +
                     std::to_string(p.input) + "]");
  }
  if (prev.h.shape() != ad::Shape{x.rows(), p.hidden} || prev.s.shape() != prev.h.shape()) {
    throw ShapeError("lstm_step: state shape does not match hidden size " + std::to_string(p.hidden));
  }
  const ad::Tensor hx = ad::concat_cols({prev.h, x});
  const ad::Tensor f = ad::sigmoid(ad::dense(hx, p.w_forget, p.b_forget));
  const ad::Tensor i = ad::sigmoid(ad::dense(hx, p.w_input, p.b_input));
  const ad::Tensor o = ad::sigmoid(ad::dense(hx, p.w_output, p.b_output));
  const ad::Tensor cand = ad::tanh(ad::dense(hx, p.w_state, p.b_state));
  LstmState next;
  next.s = ad::add(ad::mul(f, prev.s), ad::mul(i, cand));
  next.h = ad::mul(o, ad::tanh(next.s));
  return next;
}

}  // namespace trendfx::models
