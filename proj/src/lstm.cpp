#include "rfdae/lstm.hpp"

#include <cmath>

#include "rfdae/activations.hpp"
#include "rfdae/errors.hpp"

namespace rfdae {

LstmCellParams::LstmCellParams(std::size_t input_size, std::size_t hidden)
    : w_i(hidden, input_size), u_i(hidden, hidden), b_i(hidden),
      w_o(hidden, input_size), u_o(hidden, hidden), b_o(hidden),
      w_f(hidden, input_size), u_f(hidden, hidden), b_f(hidden),
      w_c(hidden, input_size), u_c(hidden, hidden), b_c(hidden) {}

void LstmCellParams::init_uniform(Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden()));
  for (Matrix* m : {&w_i, &u_i, &w_o, &u_o, &w_f, &u_f, &w_c, &u_c}) {
    for (double& v : m->span()) v = rng.uniform(-k, k);
  }
  b_i.fill(0.0);
  b_o.fill(0.0);
  b_f.fill(1.0);
  b_c.fill(0.0);
}

void LstmCellParams::set_zero() {
  for_each_tensor([](const char*, std::span<double> v, TensorShape) {
    std::fill(v.begin(), v.end(), 0.0);
  });
}

namespace {

// Pre-activations z = b + W x + U h for the four gates, written into out_{i,o,f,c}.
void gate_preactivations(const LstmCellParams& p, const double* x, const double* h, double* zi,
                         double* zo, double* zf, double* zc) {
  const std::size_t hid = p.hidden();
  const std::size_t in = p.input_size();
  std::copy(p.b_i.begin(), p.b_i.end(), zi);
  std::copy(p.b_o.begin(), p.b_o.end(), zo);
  std::copy(p.b_f.begin(), p.b_f.end(), zf);
  std::copy(p.b_c.begin(), p.b_c.end(), zc);
  kernels::gemv_acc(p.w_i.data(), hid, in, x, zi);
  kernels::gemv_acc(p.u_i.data(), hid, hid, h, zi);
  kernels::gemv_acc(p.w_o.data(), hid, in, x, zo);
  kernels::gemv_acc(p.u_o.data(), hid, hid, h, zo);
  kernels::gemv_acc(p.w_f.data(), hid, in, x, zf);
  kernels::gemv_acc(p.u_f.data(), hid, hid, h, zf);
  kernels::gemv_acc(p.w_c.data(), hid, in, x, zc);
  kernels::gemv_acc(p.u_c.data(), hid, hid, h, zc);
}

void check_state(const LstmCellParams& p, const LstmState& s) {
  if (s.h.size() != p.hidden() || s.c.size() != p.hidden()) {
    throw ShapeError("lstm state length does not match hidden size " + std::to_string(p.hidden()));
  }
}

}  // namespace

LstmState cell_step(const LstmCellParams& params, const Vector& x, const LstmState& prev,
                    LstmStepCache* cache) {
  const std::size_t hid = params.hidden();
  if (x.size() != params.input_size()) {
    throw ShapeError("cell_step: input length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(params.input_size()));
  }
  check_state(params, prev);

  Vector i(hid), o(hid), f(hid), g(hid);
  gate_preactivations(params, x.data(), prev.h.data(), i.data(), o.data(), f.data(), g.data());
  sigmoid_inplace(i.span());
  sigmoid_inplace(o.span());
  sigmoid_inplace(f.span());
  tanh_inplace(g.span());

  LstmState next = LstmState::zeros(hid);
  Vector tanh_c(hid);
  for (std::size_t k = 0; k < hid; ++k) {
    next.c[k] = f[k] * prev.c[k] + i[k] * g[k];
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = o[k] * tanh_c[k];
  }
  require_finite(next.c.span(), "lstm cell state");
  if (cache != nullptr) {
    *cache = LstmStepCache{x, prev.h, prev.c, std::move(i), std::move(o), std::move(f),
                           std::move(g), next.c, std::move(tanh_c)};
  }
  return next;
}

LstmStack::LstmStack(std::size_t input_size, std::size_t hidden, std::size_t depth) {
  if (depth == 0) throw ConfigError("lstm stack depth must be at least 1");
  layers.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) layers.emplace_back(l == 0 ? input_size : hidden, hidden);
}

std::size_t LstmStack::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.parameter_count();
  return total;
}

void LstmStack::init_uniform(Rng& rng) {
  for (auto& l : layers) l.init_uniform(rng);
}

void LstmStack::set_zero() {
  for (auto& l : layers) l.set_zero();
}

void LstmStack::validate() const {
  if (layers.empty()) throw ShapeError("lstm stack has no layers");
  const std::size_t hid = hidden();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = layers[l];
    const std::size_t in = p.input_size();
    if (p.hidden() != hid || (l > 0 && in != hid)) {
      throw ShapeError("lstm layer " + std::to_string(l) + " sizes do not chain");
    }
    for (const Matrix* w : {&p.w_i, &p.w_o, &p.w_f, &p.w_c}) {
      if (w->rows() != hid || w->cols() != in) throw ShapeError("lstm W shape mismatch");
    }
    for (const Matrix* u : {&p.u_i, &p.u_o, &p.u_f, &p.u_c}) {
      if (u->rows() != hid || u->cols() != hid) throw ShapeError("lstm U shape mismatch");
    }
    for (const Vector* b : {&p.b_i, &p.b_o, &p.b_f, &p.b_c}) {
      if (b->size() != hid) throw ShapeError("lstm bias shape mismatch");
    }
  }
}

LstmStackGrads zero_grads(const LstmStack& stack) {
  LstmStackGrads grads;
  grads.reserve(stack.depth());
  for (const auto& l : stack.layers) grads.emplace_back(l.input_size(), l.hidden());
  return grads;
}

SequenceOutput sequence_forward(const LstmStack& stack, const Matrix& x, const DropoutSpec& dropout,
                                Rng& rng, LstmStackCache* cache,
                                std::span<const LstmState> initial) {
  const std::size_t n = x.rows();
  const std::size_t hid = stack.hidden();
  if (n == 0) throw ShapeError("sequence_forward: empty sequence");
  if (stack.depth() == 0) throw ShapeError("sequence_forward: empty stack");
  if (x.cols() != stack.input_size()) {
    throw ShapeError("sequence_forward: input " + x.shape_string() + " but stack expects " +
                     std::to_string(stack.input_size()) + " features");
  }
  if (!initial.empty() && initial.size() != stack.depth()) {
    throw ShapeError("sequence_forward: need one initial state per layer");
  }

  if (cache != nullptr) {
    cache->layers.assign(stack.depth(), LstmLayerCache{});
    cache->dropout = dropout;
    cache->valid = false;
  }

  SequenceOutput out;
  out.final_states.reserve(stack.depth());
  Matrix layer_input = x;
  std::vector<double> zi(hid), zo(hid), zf(hid), zc(hid);

  for (std::size_t l = 0; l < stack.depth(); ++l) {
    const LstmCellParams& p = stack.layers[l];
    LstmState state = initial.empty() ? LstmState::zeros(hid) : initial[l];
    check_state(p, state);

    Matrix h_seq(n, hid);
    LstmLayerCache* lc = cache != nullptr ? &cache->layers[l] : nullptr;
    if (lc != nullptr) {
      lc->initial = state;
      for (Matrix* m : {&lc->i, &lc->o, &lc->f, &lc->g, &lc->c, &lc->tanh_c}) *m = Matrix(n, hid);
    }

    for (std::size_t j = 0; j < n; ++j) {
      gate_preactivations(p, layer_input.row(j).data(), state.h.data(), zi.data(), zo.data(),
                          zf.data(), zc.data());
      sigmoid_inplace(zi);
      sigmoid_inplace(zo);
      sigmoid_inplace(zf);
      tanh_inplace(zc);
      auto h_row = h_seq.row(j);
      for (std::size_t k = 0; k < hid; ++k) {
        const double c = zf[k] * state.c[k] + zi[k] * zc[k];
        const double tc = std::tanh(c);
        state.c[k] = c;
        state.h[k] = zo[k] * tc;
        h_row[k] = state.h[k];
        if (lc != nullptr) {
          lc->i(j, k) = zi[k];
          lc->o(j, k) = zo[k];
          lc->f(j, k) = zf[k];
          lc->g(j, k) = zc[k];
          lc->c(j, k) = c;
          lc->tanh_c(j, k) = tc;
        }
      }
    }
    require_finite(h_seq.span(), "lstm hidden sequence");
    out.final_states.push_back(state);

    Matrix mask(n, hid, 1.0);
    Matrix dropped = h_seq;
    if (dropout.active()) dropout_inplace(dropout, dropped.span(), mask.span(), rng);

    if (lc != nullptr) {
      lc->input = std::move(layer_input);
      lc->h = std::move(h_seq);
      lc->mask = std::move(mask);
    }
    layer_input = std::move(dropped);
  }

  out.h_seq = std::move(layer_input);
  out.h_n = Vector(std::vector<double>(out.h_seq.row(n - 1).begin(), out.h_seq.row(n - 1).end()));
  if (cache != nullptr) cache->valid = true;
  return out;
}

void sequence_backward_acc(const LstmStack& stack, const LstmStackCache& cache,
                           const Matrix& upstream_h_seq, LstmStackGrads& grads, Matrix* grad_x) {
  if (!cache.valid || cache.layers.size() != stack.depth()) {
    throw StateError("sequence_backward called without a cached forward pass");
  }
  const std::size_t hid = stack.hidden();
  const std::size_t n = cache.layers.front().h.rows();
  if (upstream_h_seq.rows() != n || upstream_h_seq.cols() != hid) {
    throw ShapeError("sequence_backward: upstream " + upstream_h_seq.shape_string() +
                     " does not match forward " + std::to_string(n) + "x" + std::to_string(hid));
  }
  if (grads.size() != stack.depth()) throw ShapeError("sequence_backward: gradient depth mismatch");

  Matrix d_out = upstream_h_seq;
  std::vector<double> dh(hid), dc(hid), dh_next(hid), dc_next(hid);
  std::vector<double> dzi(hid), dzo(hid), dzf(hid), dzc(hid);

  for (std::size_t l = stack.depth(); l-- > 0;) {
    const LstmCellParams& p = stack.layers[l];
    const LstmLayerCache& lc = cache.layers[l];
    LstmCellGrads& gr = grads[l];
    const std::size_t in = p.input_size();

    dropout_backward_inplace(cache.dropout, d_out.span(), lc.mask.span());

    const bool need_dx = l > 0 || grad_x != nullptr;
    Matrix d_in = need_dx ? Matrix(n, in) : Matrix();
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::fill(dc_next.begin(), dc_next.end(), 0.0);

    for (std::size_t j = n; j-- > 0;) {
      const double* h_prev = j > 0 ? lc.h.row(j - 1).data() : lc.initial.h.data();
      const double* c_prev = j > 0 ? lc.c.row(j - 1).data() : lc.initial.c.data();
      const double* x_j = lc.input.row(j).data();
      const auto d_row = d_out.row(j);
      for (std::size_t k = 0; k < hid; ++k) {
        const double i = lc.i(j, k), o = lc.o(j, k), f = lc.f(j, k), g = lc.g(j, k);
        const double tc = lc.tanh_c(j, k);
        dh[k] = d_row[k] + dh_next[k];
        dc[k] = dh[k] * o * (1.0 - tc * tc) + dc_next[k];
        dzo[k] = dh[k] * tc * o * (1.0 - o);
        dzi[k] = dc[k] * g * i * (1.0 - i);
        dzf[k] = dc[k] * c_prev[k] * f * (1.0 - f);
        dzc[k] = dc[k] * i * (1.0 - g * g);
        dc_next[k] = dc[k] * f;
      }

      kernels::outer_acc(gr.w_i.data(), hid, in, dzi.data(), x_j);
      kernels::outer_acc(gr.w_o.data(), hid, in, dzo.data(), x_j);
      kernels::outer_acc(gr.w_f.data(), hid, in, dzf.data(), x_j);
      kernels::outer_acc(gr.w_c.data(), hid, in, dzc.data(), x_j);
      kernels::outer_acc(gr.u_i.data(), hid, hid, dzi.data(), h_prev);
      kernels::outer_acc(gr.u_o.data(), hid, hid, dzo.data(), h_prev);
      kernels::outer_acc(gr.u_f.data(), hid, hid, dzf.data(), h_prev);
      kernels::outer_acc(gr.u_c.data(), hid, hid, dzc.data(), h_prev);
      for (std::size_t k = 0; k < hid; ++k) {
        gr.b_i[k] += dzi[k];
        gr.b_o[k] += dzo[k];
        gr.b_f[k] += dzf[k];
        gr.b_c[k] += dzc[k];
      }

      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      kernels::gemv_t_acc(p.u_i.data(), hid, hid, dzi.data(), dh_next.data());
      kernels::gemv_t_acc(p.u_o.data(), hid, hid, dzo.data(), dh_next.data());
      kernels::gemv_t_acc(p.u_f.data(), hid, hid, dzf.data(), dh_next.data());
      kernels::gemv_t_acc(p.u_c.data(), hid, hid, dzc.data(), dh_next.data());

      if (need_dx) {
        double* dx = d_in.row(j).data();
        kernels::gemv_t_acc(p.w_i.data(), hid, in, dzi.data(), dx);
        kernels::gemv_t_acc(p.w_o.data(), hid, in, dzo.data(), dx);
        kernels::gemv_t_acc(p.w_f.data(), hid, in, dzf.data(), dx);
        kernels::gemv_t_acc(p.w_c.data(), hid, in, dzc.data(), dx);
      }
    }
    if (l > 0) {
      d_out = std::move(d_in);
    } else if (grad_x != nullptr) {
      *grad_x = std::move(d_in);
    }
  }
}

SequenceBackward sequence_backward(const LstmStack& stack, const LstmStackCache& cache,
                                   const Matrix& upstream_h_seq, const Vector& upstream_h_n) {
  if (!cache.valid) throw StateError("sequence_backward called without a cached forward pass");
  if (upstream_h_n.size() != stack.hidden()) {
    throw ShapeError("sequence_backward: upstream h_n length mismatch");
  }
  Matrix upstream = upstream_h_seq;
  if (upstream.rows() > 0 && upstream.cols() == upstream_h_n.size()) {
    auto last = upstream.row(upstream.rows() - 1);
    for (std::size_t k = 0; k < last.size(); ++k) last[k] += upstream_h_n[k];
  }
  SequenceBackward out{zero_grads(stack), Matrix()};
  sequence_backward_acc(stack, cache, upstream, out.grads, &out.grad_x);
  return out;
}

}  // namespace rfdae
