// lanemon/baselines.cpp
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

#include "lanemon/baselines.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lanemon/common.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::baselines {

using json = nlohmann::json;

Eigen::VectorXf sae_input(const img::Image& im, int down) {
  LANEMON_CHECK(im.channels == 3, "expected an RGB frame");
  LANEMON_CHECK(down >= 1 && im.width % down == 0 && im.height % down == 0,
                "frame dimensions must divide the reduction factor");
  const int oh = im.height / down, ow = im.width / down;
  Eigen::VectorXf out(oh * ow);
  const float denom = 3.0f * down * down * 255.0f;
  for (int by = 0; by < oh; ++by) {
    for (int bx = 0; bx < ow; ++bx) {
      int sum = 0;
      for (int y = by * down; y < (by + 1) * down; ++y)
        for (int x = bx * down; x < (bx + 1) * down; ++x)
          sum += im.at(y, x, 0) + im.at(y, x, 1) + im.at(y, x, 2);
      out[by * ow + bx] = static_cast<float>(sum) / denom;
    }
  }
  return out;
}

double reconstruction_mse(const Eigen::VectorXf& x, const Eigen::VectorXf& xp) {
  LANEMON_CHECK(x.size() == xp.size() && x.size() > 0,
                "reconstruction must match the input shape");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(xp[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

SaeModel sae_train(const std::vector<img::Image>& images,
                   const SaeConfig& cfg) {
  LANEMON_CHECK(!images.empty(), "empty training set");
  const int n = static_cast<int>(images.size());
  const int in_dim = static_cast<int>(sae_input(images[0], cfg.down).size());

  nn::Mat<float> all(in_dim, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXf v = sae_input(images[i], cfg.down);
    LANEMON_CHECK(v.size() == in_dim, "images must share one size");
    all.col(i) = v;
  }

  SaeModel model{nn::Net<float>(nn::NetSpec::autoencoder(in_dim, cfg.hidden)),
                 cfg.down, {}};
  model.net.init_weights(cfg.train.seed);
  auto fill = [&all](const std::vector<int>& idx, nn::Mat<float>* x,
                     nn::Mat<float>* y) {
    for (size_t k = 0; k < idx.size(); ++k) {
      x->col(static_cast<Eigen::Index>(k)) = all.col(idx[k]);
      y->col(static_cast<Eigen::Index>(k)) = all.col(idx[k]);
    }
  };
  model.train_result = nn::train_sgd(&model.net, n, fill, cfg.train);
  return model;
}

double sae_score(const SaeModel& model, const img::Image& im) {
  Eigen::VectorXf x = sae_input(im, model.down);
  Eigen::VectorXf xp = model.net.forward(x);
  return reconstruction_mse(x, xp);
}

void save_sae(const SaeModel& model, const std::filesystem::path& path) {
  nn::NetMeta meta;
  meta.seed = 0;
  meta.epochs = model.train_result.kept_epochs;
  meta.diverged = model.train_result.diverged;
  meta.final_loss = model.train_result.kept_epochs > 0
                        ? model.train_result
                              .epoch_loss[model.train_result.kept_epochs - 1]
                        : 0.0;
  nn::save_net(model.net, meta, path);
}

SaeModel load_sae(const std::filesystem::path& path, int in_h, int in_w,
                  int hidden, int down) {
  const int in_dim = (in_h / down) * (in_w / down);
  nn::NetMeta meta;
  SaeModel model{
      nn::load_net(nn::NetSpec::autoencoder(in_dim, hidden), path, &meta),
      down,
      {}};
  model.train_result.diverged = meta.diverged;
  model.train_result.kept_epochs = meta.epochs;
  return model;
}

double population_std(const std::vector<double>& values) {
  LANEMON_CHECK(!values.empty(), "spread of an empty set");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) /
      static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

Ensemble ensemble_train(const nn::NetSpec& spec, const nn::ImageDataset& data,
                        const EnsembleConfig& cfg) {
  LANEMON_CHECK(cfg.members >= 2, "an ensemble needs at least two members");
  LANEMON_CHECK(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0,
                "training fraction must lie in (0, 1]");
  const int n = static_cast<int>(data.images.size());
  LANEMON_CHECK(n > 0, "empty training set");
  const int n_sub = std::max(
      1, static_cast<int>(std::lround(cfg.train_fraction * n)));

  Ensemble out;
  out.spec = spec;
  auto base_fill = nn::make_image_batch_fill(data);
  for (int m = 0; m < cfg.members; ++m) {
    const std::uint64_t member_seed =
        derive_seed(cfg.seed, "member", static_cast<std::uint64_t>(m));

    // Member-specific training subset: the first n_sub entries of a seeded
    // shuffle of the sample indices.
    std::vector<int> subset(n);
    std::iota(subset.begin(), subset.end(), 0);
    SplitMix64 rng(derive_seed(member_seed, "split"));
    rng.shuffle(subset);
    subset.resize(n_sub);

    auto fill = [&base_fill, &subset](const std::vector<int>& idx,
                                      nn::Mat<float>* x, nn::Mat<float>* y) {
      std::vector<int> global(idx.size());
      for (size_t k = 0; k < idx.size(); ++k) global[k] = subset[idx[k]];
      base_fill(global, x, y);
    };

    nn::Net<float> net(spec);
    net.init_weights(member_seed);
    nn::TrainConfig tc = cfg.train;
    tc.seed = member_seed;
    nn::train_sgd(&net, n_sub, fill, tc);
    out.members.push_back(std::move(net));
  }
  return out;
}

double ensemble_score(const std::vector<nn::Net<float>>& members,
                      const img::Image& im) {
  LANEMON_CHECK(members.size() >= 2, "an ensemble needs at least two members");
  Eigen::VectorXf x = nn::to_input(im);
  std::vector<double> steering;
  steering.reserve(members.size());
  for (const nn::Net<float>& net : members)
    steering.push_back(static_cast<double>(net.forward(x)(0, 0)));
  return population_std(steering);
}

void save_ensemble(const Ensemble& e, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (size_t m = 0; m < e.members.size(); ++m) {
    const std::string leaf = strfmt("member-%02zu.lmw", m);
    nn::NetMeta meta;
    nn::save_net(e.members[m], meta, dir / leaf);
    files.push_back(leaf);
  }
  json doc = {{"version", 1},
              {"members", static_cast<int>(e.members.size())},
              {"files", files}};
  write_file_atomic(dir / "ensemble.json", doc.dump(2) + "\n");
}

Ensemble load_ensemble(const nn::NetSpec& spec,
                       const std::filesystem::path& dir) {
  const auto mpath = dir / "ensemble.json";
  if (!std::filesystem::exists(mpath))
    throw std::runtime_error("no ensemble manifest at " + mpath.string());
  json doc = json::parse(read_text_file(mpath));
  Ensemble e;
  e.spec = spec;
  for (const json& f : doc.at("files"))
    e.members.push_back(nn::load_net(spec, dir / f.get<std::string>()));
  if (e.members.size() < 2)
    throw std::runtime_error("ensemble at " + dir.string() +
                             " has fewer than two members");
  return e;
}

Ensemble ensemble_for_mutant(const mutate::MutantPool& pool,
                             const nn::NetSpec& spec, mutate::Operator op,
                             double param) {
  auto models = pool.find(op, param);
  if (models.size() < 2)
    throw std::runtime_error(strfmt(
        "mutant pool has %zu models for %s-%g; an ensemble needs at least 2",
        models.size(), mutate::operator_name(op), param));
  Ensemble e;
  e.spec = spec;
  for (const mutate::MutantModel* m : models)
    e.members.push_back(nn::load_net(spec, pool.weight_path(*m)));
  return e;
}

}  // namespace lanemon::baselines
