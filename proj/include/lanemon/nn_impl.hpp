// lanemon/nn_impl.hpp
//
// Copyright 2026 The Lanemon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Template bodies for Net<S>. Included from nn.hpp; not a public header.

#ifndef LANEMON_NN_IMPL_HPP_
#define LANEMON_NN_IMPL_HPP_

#include "lanemon/nn.hpp"

namespace lanemon::nn {

namespace detail {

// (C x B*H*W) activation block -> im2col matrix (C*KH*KW x B*OH*OW).
template <typename S>
void im2col(const Mat<S>& in, const LayerShape& sh, const LayerSpec& sp,
            int batch, Mat<S>* cols) {
  int hw = sh.in_h * sh.in_w;
  int ohw = sh.out_h * sh.out_w;
  cols->resize(sh.in_c * sp.kh * sp.kw, static_cast<long>(batch) * ohw);
  for (int b = 0; b < batch; ++b) {
    for (int oy = 0; oy < sh.out_h; ++oy) {
      for (int ox = 0; ox < sh.out_w; ++ox) {
        long col = static_cast<long>(b) * ohw + static_cast<long>(oy) * sh.out_w + ox;
        S* dst = cols->data() + col * cols->rows();
        for (int c = 0; c < sh.in_c; ++c) {
          const S* src = in.data();
          for (int ky = 0; ky < sp.kh; ++ky) {
            int sy = oy * sp.stride + ky;
            long base =
                (static_cast<long>(b) * hw + static_cast<long>(sy) * sh.in_w +
                 ox * sp.stride) * in.rows() + c;
            for (int kx = 0; kx < sp.kw; ++kx)
              *dst++ = src[base + static_cast<long>(kx) * in.rows()];
          }
        }
      }
    }
  }
}

// Scatter-add of col gradients back onto the input activation layout.
template <typename S>
void col2im(const Mat<S>& cols, const LayerShape& sh, const LayerSpec& sp,
            int batch, Mat<S>* din) {
  int hw = sh.in_h * sh.in_w;
  int ohw = sh.out_h * sh.out_w;
  din->setZero(sh.in_c, static_cast<long>(batch) * hw);
  for (int b = 0; b < batch; ++b) {
    for (int oy = 0; oy < sh.out_h; ++oy) {
      for (int ox = 0; ox < sh.out_w; ++ox) {
        long col = static_cast<long>(b) * ohw + static_cast<long>(oy) * sh.out_w + ox;
        const S* src = cols.data() + col * cols.rows();
        for (int c = 0; c < sh.in_c; ++c) {
          S* dst = din->data();
          for (int ky = 0; ky < sp.kh; ++ky) {
            int sy = oy * sp.stride + ky;
            long base =
                (static_cast<long>(b) * hw + static_cast<long>(sy) * sh.in_w +
                 ox * sp.stride) * din->rows() + c;
            for (int kx = 0; kx < sp.kw; ++kx)
              dst[base + static_cast<long>(kx) * din->rows()] += *src++;
          }
        }
      }
    }
  }
}

// (C x B*HW) -> (C*HW x B), CHW order per sample.
template <typename S>
void flatten_fwd(const Mat<S>& in, int batch, Mat<S>* out) {
  int c = static_cast<int>(in.rows());
  long hw = in.cols() / batch;
  out->resize(c * hw, batch);
  for (int b = 0; b < batch; ++b)
    for (long p = 0; p < hw; ++p)
      for (int ch = 0; ch < c; ++ch)
        (*out)(static_cast<long>(ch) * hw + p, b) = in(ch, static_cast<long>(b) * hw + p);
}

template <typename S>
void flatten_bwd(const Mat<S>& dout, int batch, int c, Mat<S>* din) {
  long hw = dout.rows() / c;
  din->resize(c, static_cast<long>(batch) * hw);
  for (int b = 0; b < batch; ++b)
    for (long p = 0; p < hw; ++p)
      for (int ch = 0; ch < c; ++ch)
        (*din)(ch, static_cast<long>(b) * hw + p) = dout(static_cast<long>(ch) * hw + p, b);
}

template <typename S>
void apply_act(Act act, Mat<S>* m) {
  switch (act) {
    case Act::kLinear:
      break;
    case Act::kRelu:
      *m = m->cwiseMax(S(0));
      break;
    case Act::kTanh:
      m->array() = m->array().tanh();
      break;
    case Act::kSigmoid:
      m->array() = S(1) / (S(1) + (-m->array()).exp());
      break;
    case Act::kControlHead:
      LANEMON_CHECK(m->rows() == 2, "control head needs two output units");
      m->row(0).array() = m->row(0).array().tanh();
      m->row(1).array() = S(1) / (S(1) + (-m->row(1).array()).exp());
      break;
  }
}

// dLoss/dPre from dLoss/dOut using the cached post-activation values.
template <typename S>
void act_backward(Act act, const Mat<S>& out, Mat<S>* d) {
  switch (act) {
    case Act::kLinear:
      break;
    case Act::kRelu:
      d->array() *= (out.array() > S(0)).template cast<S>();
      break;
    case Act::kTanh:
      d->array() *= S(1) - out.array().square();
      break;
    case Act::kSigmoid:
      d->array() *= out.array() * (S(1) - out.array());
      break;
    case Act::kControlHead:
      d->row(0).array() *= S(1) - out.row(0).array().square();
      d->row(1).array() *= out.row(1).array() * (S(1) - out.row(1).array());
      break;
  }
}

}  // namespace detail

template <typename S>
Net<S>::Net(const NetSpec& spec) : spec_(spec), shapes_(resolve_shapes(spec)) {
  W_.resize(spec_.layers.size());
  b_.resize(spec_.layers.size());
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& sp = spec_.layers[i];
    const LayerShape& sh = shapes_[i];
    if (sp.kind == LayerSpec::kConv) {
      W_[i].setZero(sp.out_ch, sh.in_c * sp.kh * sp.kw);
      b_[i].setZero(sp.out_ch);
    } else if (sp.kind == LayerSpec::kDense) {
      W_[i].setZero(sp.units, sh.in_dim());
      b_[i].setZero(sp.units);
    }
  }
}

template <typename S>
long Net<S>::param_count() const {
  long n = 0;
  for (size_t i = 0; i < W_.size(); ++i) n += W_[i].size() + b_[i].size();
  return n;
}

template <typename S>
void Net<S>::init_weights(std::uint64_t seed) {
  for (size_t i = 0; i < W_.size(); ++i) {
    if (W_[i].size() == 0) continue;
    SplitMix64 rng(derive_seed(seed, "layer", i));
    double bound = std::sqrt(6.0 / static_cast<double>(W_[i].cols()));
    for (long k = 0; k < W_[i].size(); ++k)
      W_[i].data()[k] = static_cast<S>(rng.uniform(-bound, bound));
    b_[i].setZero();
  }
}

template <typename S>
Mat<S> Net<S>::forward_train(const Mat<S>& x,
                             std::vector<LayerCache<S>>* cache) const {
  LANEMON_CHECK(x.rows() == in_dim(), "input dimension mismatch");
  int batch = static_cast<int>(x.cols());
  if (cache) cache->assign(spec_.layers.size(), {});

  Mat<S> cur;
  bool conv_layout = false;
  // Conv stage layout (C x B*HW); dense stage layout (dim x B).
  if (!spec_.layers.empty() && spec_.layers[0].kind == LayerSpec::kConv) {
    detail::flatten_bwd(x, batch, spec_.in_ch, &cur);  // unflatten CHW columns
    conv_layout = true;
  } else {
    cur = x;
  }

  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& sp = spec_.layers[i];
    const LayerShape& sh = shapes_[i];
    if (sp.kind == LayerSpec::kConv) {
      LANEMON_CHECK(conv_layout, "conv after flatten is unsupported");
      Mat<S> cols;
      detail::im2col(cur, sh, sp, batch, &cols);
      cur.noalias() = W_[i] * cols;
      cur.colwise() += b_[i];
      detail::apply_act(sp.act, &cur);
      if (cache) {
        (*cache)[i].cols = std::move(cols);
        (*cache)[i].out = cur;
      }
    } else if (sp.kind == LayerSpec::kFlatten) {
      Mat<S> flat;
      detail::flatten_fwd(cur, batch, &flat);
      cur = std::move(flat);
      conv_layout = false;
      if (cache) (*cache)[i].out = cur;
    } else {
      LANEMON_CHECK(!conv_layout, "dense layer needs flattened input");
      Mat<S> pre;
      pre.noalias() = W_[i] * cur;
      pre.colwise() += b_[i];
      detail::apply_act(sp.act, &pre);
      cur = std::move(pre);
      if (cache) (*cache)[i].out = cur;
    }
  }
  return cur;
}

template <typename S>
Mat<S> Net<S>::forward(const Mat<S>& x) const {
  return forward_train(x, nullptr);
}

template <typename S>
void Net<S>::backward(const Mat<S>& x, const std::vector<LayerCache<S>>& cache,
                      const Mat<S>& dy, Gradients<S>* g) const {
  int batch = static_cast<int>(x.cols());
  g->dW.assign(W_.size(), {});
  g->db.assign(b_.size(), {});

  Mat<S> d = dy;
  for (long i = static_cast<long>(spec_.layers.size()) - 1; i >= 0; --i) {
    const LayerSpec& sp = spec_.layers[i];
    const LayerShape& sh = shapes_[i];
    if (sp.kind == LayerSpec::kFlatten) {
      Mat<S> din;
      detail::flatten_bwd(d, batch, sh.in_c, &din);
      d = std::move(din);
      continue;
    }
    detail::act_backward(sp.act, cache[i].out, &d);
    if (sp.kind == LayerSpec::kDense) {
      const Mat<S>& prev =
          i == 0 ? x : cache[i - 1].out;  // dense stage input is (dim x B)
      g->dW[i].noalias() = d * prev.transpose();
      g->db[i] = d.rowwise().sum();
      if (i > 0) {
        Mat<S> dprev;
        dprev.noalias() = W_[i].transpose() * d;
        d = std::move(dprev);
      }
    } else {
      g->dW[i].noalias() = d * cache[i].cols.transpose();
      g->db[i] = d.rowwise().sum();
      if (i > 0) {
        Mat<S> dcols;
        dcols.noalias() = W_[i].transpose() * d;
        Mat<S> din;
        detail::col2im(dcols, sh, sp, batch, &din);
        d = std::move(din);
      }
    }
  }
}

template <typename S>
void Net<S>::apply_sgd(const Gradients<S>& g, S lr) {
  for (size_t i = 0; i < W_.size(); ++i) {
    if (W_[i].size() == 0) continue;
    W_[i] -= lr * g.dW[i];
    b_[i] -= lr * g.db[i];
  }
}

template <typename S>
S Net<S>::get_param(long i) const {
  for (size_t l = 0; l < W_.size(); ++l) {
    if (i < W_[l].size()) return W_[l].data()[i];
    i -= W_[l].size();
    if (i < b_[l].size()) return b_[l].data()[i];
    i -= b_[l].size();
  }
  throw std::out_of_range("parameter index");
}

template <typename S>
void Net<S>::set_param(long i, S v) {
  for (size_t l = 0; l < W_.size(); ++l) {
    if (i < W_[l].size()) {
      W_[l].data()[i] = v;
      return;
    }
    i -= W_[l].size();
    if (i < b_[l].size()) {
      b_[l].data()[i] = v;
      return;
    }
    i -= b_[l].size();
  }
  throw std::out_of_range("parameter index");
}

template <typename S>
bool Net<S>::finite() const {
  for (size_t i = 0; i < W_.size(); ++i)
    if (!W_[i].allFinite() || !b_[i].allFinite()) return false;
  return true;
}

}  // namespace lanemon::nn

#endif  // LANEMON_NN_IMPL_HPP_
