#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rfdae/dropout.hpp"
#include "rfdae/matrix.hpp"
#include "rfdae/rng.hpp"

namespace rfdae {

// Weights of one LSTM layer:
//   i = sigmoid(W_i x + U_i h + b_i)     input gate
//   o = sigmoid(W_o x + U_o h + b_o)     output gate
//   f = sigmoid(W_f x + U_f h + b_f)     forget gate
//   c' = f * c + i * tanh(W_c x + U_c h + b_c)
//   h' = o * tanh(c')
// W_* are H x in, U_* are H x H, b_* have length H.
struct LstmCellParams {
  Matrix w_i, u_i;
  Vector b_i;
  Matrix w_o, u_o;
  Vector b_o;
  Matrix w_f, u_f;
  Vector b_f;
  Matrix w_c, u_c;
  Vector b_c;

  LstmCellParams() = default;
  LstmCellParams(std::size_t input_size, std::size_t hidden);

  std::size_t hidden() const { return b_i.size(); }
  std::size_t input_size() const { return w_i.cols(); }
  std::size_t parameter_count() const { return 4 * (hidden() * (input_size() + hidden()) + hidden()); }

  // W, U ~ Uniform(-1/sqrt(H), 1/sqrt(H)); biases zero except b_f = 1.
  void init_uniform(Rng& rng);
  void set_zero();

  // Visits the 12 tensors in canonical order W_i, U_i, b_i, W_o, U_o, b_o, W_f, U_f, b_f,
  // W_c, U_c, b_c. fn(const char* name, std::span<double> values, TensorShape shape).
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    fn("W_i", w_i.span(), TensorShape::of(w_i));
    fn("U_i", u_i.span(), TensorShape::of(u_i));
    fn("b_i", b_i.span(), TensorShape::of(b_i));
    fn("W_o", w_o.span(), TensorShape::of(w_o));
    fn("U_o", u_o.span(), TensorShape::of(u_o));
    fn("b_o", b_o.span(), TensorShape::of(b_o));
    fn("W_f", w_f.span(), TensorShape::of(w_f));
    fn("U_f", u_f.span(), TensorShape::of(u_f));
    fn("b_f", b_f.span(), TensorShape::of(b_f));
    fn("W_c", w_c.span(), TensorShape::of(w_c));
    fn("U_c", u_c.span(), TensorShape::of(u_c));
    fn("b_c", b_c.span(), TensorShape::of(b_c));
  }
};

// Gradients share the parameter layout.
using LstmCellGrads = LstmCellParams;

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden) { return {Vector(hidden), Vector(hidden)}; }
};

// Gate activations of one step, kept for backpropagation.
struct LstmStepCache {
  Vector x, h_prev, c_prev;
  Vector i, o, f, g;  // g = tanh(W_c x + U_c h + b_c)
  Vector c, tanh_c;
};

LstmState cell_step(const LstmCellParams& params, const Vector& x, const LstmState& prev,
                    LstmStepCache* cache = nullptr);

// Stacked LSTM encoder. Layer 0 reads the m input features; later layers read H.
struct LstmStack {
  std::vector<LstmCellParams> layers;

  LstmStack() = default;
  LstmStack(std::size_t input_size, std::size_t hidden, std::size_t depth);

  std::size_t depth() const { return layers.size(); }
  std::size_t hidden() const { return layers.empty() ? 0 : layers.front().hidden(); }
  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().input_size(); }
  std::size_t parameter_count() const;

  void init_uniform(Rng& rng);
  void set_zero();
  // Throws ShapeError unless layer sizes chain correctly.
  void validate() const;
};

using LstmStackGrads = std::vector<LstmCellGrads>;

LstmStackGrads zero_grads(const LstmStack& stack);

// Per-layer record of a sequence pass; rows are timesteps.
struct LstmLayerCache {
  Matrix input;                  // n x in, as fed to this layer
  Matrix i, o, f, g, c, tanh_c;  // n x H
  Matrix h;                      // n x H, before dropout
  Matrix mask;                   // n x H dropout mask (all ones when inactive)
  LstmState initial;
};

struct LstmStackCache {
  std::vector<LstmLayerCache> layers;
  DropoutSpec dropout;
  bool valid = false;
};

struct SequenceOutput {
  Matrix h_seq;  // n x H, top layer (after dropout in Train mode)
  Vector h_n;    // last row of h_seq
  std::vector<LstmState> final_states;  // per layer, before dropout
};

// Runs every layer across the whole sequence. Each layer's output sequence passes through
// dropout (Train mode only) before feeding the next layer or leaving the stack.
// `initial` holds one state per layer; empty means zero initial states.
SequenceOutput sequence_forward(const LstmStack& stack, const Matrix& x, const DropoutSpec& dropout,
                                Rng& rng, LstmStackCache* cache = nullptr,
                                std::span<const LstmState> initial = {});

struct SequenceBackward {
  LstmStackGrads grads;
  Matrix grad_x;
};

// Backpropagation through time. `upstream_h_n` is added to the last row of `upstream_h_seq`.
SequenceBackward sequence_backward(const LstmStack& stack, const LstmStackCache& cache,
                                   const Matrix& upstream_h_seq, const Vector& upstream_h_n);

// Accumulating form used by the model. grad_x may be null when the input gradient is not needed.
void sequence_backward_acc(const LstmStack& stack, const LstmStackCache& cache,
                           const Matrix& upstream_h_seq, LstmStackGrads& grads, Matrix* grad_x);

}  // namespace rfdae
