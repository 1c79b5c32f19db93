// src/nn.cpp
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

#include "lanemon/nn.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include <nlohmann/json.hpp>

namespace lanemon::nn {

using json = nlohmann::json;

const char* act_name(Act a) {
  switch (a) {
    case Act::kLinear: return "linear";
    case Act::kRelu: return "relu";
    case Act::kTanh: return "tanh";
    case Act::kSigmoid: return "sigmoid";
    case Act::kControlHead: return "control_head";
  }
  return "?";
}

Act act_from_name(const std::string& s) {
  if (s == "linear") return Act::kLinear;
  if (s == "relu") return Act::kRelu;
  if (s == "tanh") return Act::kTanh;
  if (s == "sigmoid") return Act::kSigmoid;
  if (s == "control_head") return Act::kControlHead;
  throw std::runtime_error("unknown activation: " + s);
}

std::string NetSpec::to_string() const {
  std::string s = strfmt("in:%dx%dx%d", in_ch, in_h, in_w);
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerSpec::kConv:
        s += strfmt("|conv:%d,%dx%d,s%d,%s", l.out_ch, l.kh, l.kw, l.stride,
                    act_name(l.act));
        break;
      case LayerSpec::kFlatten:
        s += "|flatten";
        break;
      case LayerSpec::kDense:
        s += strfmt("|dense:%d,%s", l.units, act_name(l.act));
        break;
    }
  }
  return s;
}

NetSpec NetSpec::lane_controller(int in_h, int in_w) {
  NetSpec s;
  s.in_ch = 3;
  s.in_h = in_h;
  s.in_w = in_w;
  s.layers = {
      LayerSpec::conv(8, 3, 3, 2, Act::kRelu),
      LayerSpec::conv(12, 3, 3, 2, Act::kRelu),
      LayerSpec::conv(16, 3, 3, 2, Act::kRelu),
      LayerSpec::conv(16, 3, 3, 1, Act::kRelu),
      LayerSpec::conv(16, 3, 3, 1, Act::kRelu),
      LayerSpec::flatten(),
      LayerSpec::dense(32, Act::kRelu),
      LayerSpec::dense(2, Act::kControlHead),
  };
  return s;
}

NetSpec NetSpec::autoencoder(int in_dim, int hidden) {
  NetSpec s;
  s.in_ch = in_dim;
  s.in_h = 1;
  s.in_w = 1;
  s.layers = {
      LayerSpec::dense(hidden, Act::kRelu),
      LayerSpec::dense(in_dim, Act::kSigmoid),
  };
  return s;
}

NetSpec NetSpec::linear(int in_dim, int out_dim) {
  NetSpec s;
  s.in_ch = in_dim;
  s.in_h = 1;
  s.in_w = 1;
  s.layers = {LayerSpec::dense(out_dim, Act::kLinear)};
  return s;
}

std::vector<LayerShape> resolve_shapes(const NetSpec& spec) {
  LANEMON_CHECK(spec.in_ch > 0 && spec.in_h > 0 && spec.in_w > 0,
                "bad input dimensions");
  std::vector<LayerShape> out;
  int c = spec.in_ch, h = spec.in_h, w = spec.in_w;
  bool flat = false;
  for (const auto& l : spec.layers) {
    LayerShape sh{c, h, w, 0, 0, 0};
    switch (l.kind) {
      case LayerSpec::kConv: {
        LANEMON_CHECK(!flat, "conv after flatten");
        LANEMON_CHECK(l.kh <= h && l.kw <= w, "kernel larger than input");
        LANEMON_CHECK(l.stride >= 1, "bad stride");
        LANEMON_CHECK(l.act != Act::kControlHead, "control head is dense-only");
        sh.out_c = l.out_ch;
        sh.out_h = (h - l.kh) / l.stride + 1;
        sh.out_w = (w - l.kw) / l.stride + 1;
        break;
      }
      case LayerSpec::kFlatten: {
        LANEMON_CHECK(!flat, "double flatten");
        sh.out_c = c * h * w;
        sh.out_h = 1;
        sh.out_w = 1;
        flat = true;
        break;
      }
      case LayerSpec::kDense: {
        if (!flat) {
          LANEMON_CHECK(h == 1 && w == 1, "dense layer needs flattened input");
          flat = true;
        }
        LANEMON_CHECK(l.units > 0, "bad dense width");
        if (l.act == Act::kControlHead)
          LANEMON_CHECK(l.units == 2, "control head needs two units");
        sh.out_c = l.units;
        sh.out_h = 1;
        sh.out_w = 1;
        break;
      }
    }
    c = sh.out_c;
    h = sh.out_h;
    w = sh.out_w;
    out.push_back(sh);
  }
  LANEMON_CHECK(!out.empty(), "empty network");
  return out;
}

TrainResult train_sgd(Net<float>* net, int n_samples, const BatchFill& fill,
                      const TrainConfig& cfg) {
  LANEMON_CHECK(n_samples > 0, "empty training set");
  TrainResult res;
  std::vector<int> order(n_samples);
  std::iota(order.begin(), order.end(), 0);

  // Snapshot from the end of the last finite epoch; starts at init weights.
  std::vector<Mat<float>> snapW = net->weights();
  std::vector<Vec<float>> snapB = net->biases();

  Mat<float> x, y;
  std::vector<int> idx;
  std::vector<LayerCache<float>> cache;
  Gradients<float> g;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SplitMix64 rng(derive_seed(cfg.seed, "shuffle", epoch));
    rng.shuffle(order);

    double loss_sum = 0.0;
    long seen = 0;
    for (int off = 0; off < n_samples; off += cfg.batch) {
      int b = std::min(cfg.batch, n_samples - off);
      idx.assign(order.begin() + off, order.begin() + off + b);
      x.resize(net->in_dim(), b);
      y.resize(net->out_dim(), b);
      fill(idx, &x, &y);
      Mat<float> out = net->forward_train(x, &cache);
      loss_sum += static_cast<double>(mse_loss(out, y)) * b;
      seen += b;
      Mat<float> dy = mse_grad(out, y);
      net->backward(x, cache, dy, &g);
      net->apply_sgd(g, static_cast<float>(cfg.lr));
    }
    double epoch_loss = loss_sum / static_cast<double>(seen);
    res.epoch_loss.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss) || !net->finite()) {
      net->weights() = snapW;
      net->biases() = snapB;
      res.diverged = true;
      break;
    }
    snapW = net->weights();
    snapB = net->biases();
    res.kept_epochs = epoch + 1;
  }
  return res;
}

Eigen::VectorXf to_input(const img::Image& im) {
  Eigen::VectorXf v(static_cast<long>(im.size()));
  fill_input_column(im, v.data());
  return v;
}

void fill_input_column(const img::Image& im, float* dst) {
  // Interleaved HWC bytes -> planar CHW floats in [0,1].
  long hw = static_cast<long>(im.width) * im.height;
  const std::uint8_t* src = im.data.data();
  for (long p = 0; p < hw; ++p)
    for (int c = 0; c < im.channels; ++c)
      dst[c * hw + p] = src[p * im.channels + c] * (1.0f / 255.0f);
}

BatchFill make_image_batch_fill(const ImageDataset& ds) {
  return [&ds](const std::vector<int>& idx, Mat<float>* x, Mat<float>* y) {
    for (size_t k = 0; k < idx.size(); ++k) {
      const img::Image& im = ds.images[idx[k]];
      fill_input_column(im, x->col(k).data());
      (*y)(0, k) = ds.targets[idx[k]][0];
      (*y)(1, k) = ds.targets[idx[k]][1];
    }
  };
}

void save_net(const Net<float>& net, const NetMeta& meta,
              const std::filesystem::path& path) {
  json hdr;
  hdr["arch"] = net.spec().to_string();
  hdr["arch_hash"] = strfmt("%016llx",
                            static_cast<unsigned long long>(net.spec().arch_hash()));
  hdr["dtype"] = "f32le";
  hdr["param_count"] = net.param_count();
  hdr["seed"] = meta.seed;
  hdr["epochs"] = meta.epochs;
  hdr["diverged"] = meta.diverged;
  hdr["final_loss"] = meta.final_loss;

  std::string out = "LMW1\n" + hdr.dump() + "\n";
  for (size_t i = 0; i < net.weights().size(); ++i) {
    const auto& W = net.weights()[i];
    const auto& b = net.biases()[i];
    out.append(reinterpret_cast<const char*>(W.data()), W.size() * sizeof(float));
    out.append(reinterpret_cast<const char*>(b.data()), b.size() * sizeof(float));
  }
  write_file_atomic(path, out);
}

Net<float> load_net(const NetSpec& expected, const std::filesystem::path& path,
                    NetMeta* meta) {
  std::string bytes = read_text_file(path);
  if (bytes.rfind("LMW1\n", 0) != 0)
    throw std::runtime_error("not a weight file: " + path.string());
  size_t hdr_end = bytes.find('\n', 5);
  if (hdr_end == std::string::npos)
    throw std::runtime_error("truncated weight header: " + path.string());
  json hdr = json::parse(bytes.substr(5, hdr_end - 5));

  std::string want = strfmt("%016llx",
                            static_cast<unsigned long long>(expected.arch_hash()));
  if (hdr.at("arch_hash").get<std::string>() != want)
    throw std::runtime_error("architecture mismatch loading " + path.string() +
                             " (file " + hdr.at("arch").get<std::string>() +
                             ", expected " + expected.to_string() + ")");

  Net<float> net(expected);
  long params = hdr.at("param_count").get<long>();
  LANEMON_CHECK(params == net.param_count(), "weight file parameter count");
  size_t need = static_cast<size_t>(params) * sizeof(float);
  if (bytes.size() - hdr_end - 1 < need)
    throw std::runtime_error("truncated weight payload: " + path.string());
  const char* p = bytes.data() + hdr_end + 1;
  for (size_t i = 0; i < net.weights().size(); ++i) {
    auto& W = net.weights()[i];
    auto& b = net.biases()[i];
    std::memcpy(W.data(), p, W.size() * sizeof(float));
    p += W.size() * sizeof(float);
    std::memcpy(b.data(), p, b.size() * sizeof(float));
    p += b.size() * sizeof(float);
  }
  if (meta) {
    meta->seed = hdr.at("seed").get<std::uint64_t>();
    meta->epochs = hdr.at("epochs").get<int>();
    meta->diverged = hdr.at("diverged").get<bool>();
    meta->final_loss = hdr.at("final_loss").get<double>();
  }
  return net;
}

GradCheckResult grad_check(const NetSpec& spec, std::uint64_t seed,
                           int n_probes, int batch, double h) {
  // The weights under test are the production 32-bit values; quantize the
  // initialization through float so the check runs at exactly those points.
  // The differencing itself stays in double: at h = 1e-3 a float32 loss would
  // cancel to ~1e-2 relative noise and mask real defects.
  Net<float> fnet(spec);
  fnet.init_weights(seed);
  Net<double> net(spec);
  for (long i = 0; i < net.param_count(); ++i)
    net.set_param(i, static_cast<double>(fnet.get_param(i)));

  SplitMix64 rng(derive_seed(seed, "gradcheck"));
  Mat<double> x(net.in_dim(), batch), y(net.out_dim(), batch);
  for (long i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  for (long i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);

  std::vector<LayerCache<double>> cache;
  Mat<double> out = net.forward_train(x, &cache);
  Gradients<double> g;
  net.backward(x, cache, mse_grad(out, y), &g);

  // Analytic gradient in the same flat order as get_param/set_param.
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(net.param_count()));
  for (size_t l = 0; l < g.dW.size(); ++l) {
    for (long i = 0; i < g.dW[l].size(); ++i) flat.push_back(g.dW[l].data()[i]);
    for (long i = 0; i < g.db[l].size(); ++i) flat.push_back(g.db[l].data()[i]);
  }

  GradCheckResult res;
  res.checked = n_probes;
  long n = net.param_count();
  for (int k = 0; k < n_probes; ++k) {
    long pi = static_cast<long>(rng.below(static_cast<std::uint64_t>(n)));
    double w0 = net.get_param(pi);
    net.set_param(pi, w0 + h);
    double lp = mse_loss(net.forward(x), y);
    net.set_param(pi, w0 - h);
    double lm = mse_loss(net.forward(x), y);
    net.set_param(pi, w0);
    double fd = (lp - lm) / (2.0 * h);
    double an = flat[static_cast<size_t>(pi)];
    double rel = std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-8});
    if (rel > res.max_rel_err) {
      res.max_rel_err = rel;
      res.worst_param = pi;
    }
  }
  return res;
}

}  // namespace lanemon::nn
