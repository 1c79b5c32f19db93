// lanemon/nn.hpp
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
// Small feed-forward nets (valid-padding conv + dense) on Eigen matrices.
// The whole numeric core is templated on the scalar so the float production
// path and the double path used by finite-difference checks share one
// implementation. Everything is single-threaded and allocation order is
// fixed, so results are reproducible bit for bit.
//
// Data layout: a batch of inputs is a (in_dim x B) column-major matrix, one
// CHW-flattened sample per column. Inside the conv stage activations are
// (C x B*OH*OW) with per-sample column blocks; convolutions run as im2col
// followed by one GEMM.

#ifndef LANEMON_NN_HPP_
#define LANEMON_NN_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lanemon/common.hpp"
#include "lanemon/image.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::nn {

enum class Act { kLinear, kRelu, kTanh, kSigmoid, kControlHead };

const char* act_name(Act a);
Act act_from_name(const std::string& s);

struct LayerSpec {
  enum Kind { kConv, kFlatten, kDense } kind;
  int out_ch = 0, kh = 0, kw = 0, stride = 1;  // conv
  int units = 0;                               // dense
  Act act = Act::kLinear;

  static LayerSpec conv(int out_ch, int kh, int kw, int stride, Act act) {
    return {kConv, out_ch, kh, kw, stride, 0, act};
  }
  static LayerSpec flatten() { return {kFlatten, 0, 0, 0, 1, 0, Act::kLinear}; }
  static LayerSpec dense(int units, Act act) {
    return {kDense, 0, 0, 0, 1, units, act};
  }
};

struct NetSpec {
  int in_ch = 0, in_h = 0, in_w = 0;
  std::vector<LayerSpec> layers;

  // Canonical description, e.g.
  // "in:3x120x160|conv:8,3x3,s2,relu|flatten|dense:2,control_head".
  std::string to_string() const;
  std::uint64_t arch_hash() const { return fnv1a64(to_string()); }

  // The lane-keeping controller: five 3x3 conv layers (stride 2,2,2,1,1),
  // then dense 32 and a two-unit head (tanh steering, sigmoid throttle).
  static NetSpec lane_controller(int in_h = 120, int in_w = 160);
  // Dense autoencoder used by the reconstruction-error baseline.
  static NetSpec autoencoder(int in_dim = 1200, int hidden = 64);
  // Single dense linear layer; handy for exact gradient tests.
  static NetSpec linear(int in_dim, int out_dim);
};

// Resolved per-layer geometry.
struct LayerShape {
  int in_c, in_h, in_w;
  int out_c, out_h, out_w;
  int in_dim() const { return in_c * in_h * in_w; }
  int out_dim() const { return out_c * out_h * out_w; }
};

std::vector<LayerShape> resolve_shapes(const NetSpec& spec);

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Gradients {
  std::vector<Mat<S>> dW;
  std::vector<Vec<S>> db;
};

template <typename S>
struct LayerCache {
  Mat<S> cols;  // im2col matrix (conv layers)
  Mat<S> out;   // post-activation output
};

template <typename S>
class Net {
 public:
  explicit Net(const NetSpec& spec);

  const NetSpec& spec() const { return spec_; }
  const std::vector<LayerShape>& shapes() const { return shapes_; }
  int in_dim() const { return spec_.in_ch * spec_.in_h * spec_.in_w; }
  int out_dim() const { return shapes_.back().out_dim(); }
  long param_count() const;

  // He-uniform weights (bound sqrt(6/fan_in)), zero biases.
  void init_weights(std::uint64_t seed);

  Mat<S> forward(const Mat<S>& x) const;
  Mat<S> forward_train(const Mat<S>& x, std::vector<LayerCache<S>>* cache) const;

  // dy is dLoss/dOutput, (out_dim x B). Gradients are overwritten.
  void backward(const Mat<S>& x, const std::vector<LayerCache<S>>& cache,
                const Mat<S>& dy, Gradients<S>* g) const;

  void apply_sgd(const Gradients<S>& g, S lr);

  // Flat parameter view in a fixed order (per layer: W column-major, then b).
  long flat_size() const { return param_count(); }
  S get_param(long i) const;
  void set_param(long i, S v);

  std::vector<Mat<S>>& weights() { return W_; }
  std::vector<Vec<S>>& biases() { return b_; }
  const std::vector<Mat<S>>& weights() const { return W_; }
  const std::vector<Vec<S>>& biases() const { return b_; }

  bool finite() const;

  template <typename T>
  Net<T> cast() const {
    Net<T> out(spec_);
    for (size_t i = 0; i < W_.size(); ++i) {
      out.weights()[i] = W_[i].template cast<T>();
      out.biases()[i] = b_[i].template cast<T>();
    }
    return out;
  }

 private:
  NetSpec spec_;
  std::vector<LayerShape> shapes_;
  // One entry per layer; flatten layers get empty matrices.
  std::vector<Mat<S>> W_;
  std::vector<Vec<S>> b_;
};

// Mean squared error over every output entry of the batch.
template <typename S>
S mse_loss(const Mat<S>& out, const Mat<S>& target) {
  return (out - target).squaredNorm() / static_cast<S>(out.size());
}

template <typename S>
Mat<S> mse_grad(const Mat<S>& out, const Mat<S>& target) {
  return (out - target) * (S(2) / static_cast<S>(out.size()));
}

struct TrainConfig {
  int epochs = 10;
  double lr = 1e-3;
  int batch = 16;
  std::uint64_t seed = 1;
};

struct TrainResult {
  std::vector<double> epoch_loss;
  bool diverged = false;
  int kept_epochs = 0;  // epochs whose weights survived rollback
};

// Fills inputs (in_dim x n) and targets (out_dim x n) for the given sample
// indices; matrices arrive pre-sized.
using BatchFill = std::function<void(const std::vector<int>&, Mat<float>*, Mat<float>*)>;

// Plain SGD on MSE. If an epoch's mean loss turns non-finite, weights roll
// back to the end of the last finite epoch and training stops with
// `diverged` set.
TrainResult train_sgd(Net<float>* net, int n_samples, const BatchFill& fill,
                      const TrainConfig& cfg);

// CHW float column in [0,1] from an interleaved byte image.
Eigen::VectorXf to_input(const img::Image& im);
void fill_input_column(const img::Image& im, float* dst);

struct ImageDataset {
  int in_ch = 3, in_h = 120, in_w = 160;
  std::vector<img::Image> images;
  std::vector<std::array<float, 2>> targets;  // steering, throttle
};

BatchFill make_image_batch_fill(const ImageDataset& ds);

// Weight file metadata; extra fields round-trip through save/load.
struct NetMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  bool diverged = false;
  double final_loss = 0.0;
};

void save_net(const Net<float>& net, const NetMeta& meta,
              const std::filesystem::path& path);
// Refuses files whose architecture hash differs from `expected`.
Net<float> load_net(const NetSpec& expected, const std::filesystem::path& path,
                    NetMeta* meta = nullptr);

struct GradCheckResult {
  double max_rel_err = 0.0;
  long worst_param = -1;
  int checked = 0;
};

// Central finite differences in double precision against the analytic
// backward pass, on `n_probes` randomly sampled parameters.
GradCheckResult grad_check(const NetSpec& spec, std::uint64_t seed,
                           int n_probes, int batch, double h = 1e-3);

}  // namespace lanemon::nn

#include "lanemon/nn_impl.hpp"

#endif  // LANEMON_NN_HPP_
