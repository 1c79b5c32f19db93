// lanemon/baselines.hpp
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
// The two comparison monitors:
//   - A reconstruction-error monitor: a small dense autoencoder trained on
//     the controller's own training frames; frames it cannot reconstruct
//     score high.
//   - An output-spread monitor: several controllers trained from different
//     seeds and training subsets; disagreement between their steering
//     answers scores high.
// Both plug into the same smoothing / threshold / replay pipeline as the
// consistency checks.

#ifndef LANEMON_BASELINES_HPP_
#define LANEMON_BASELINES_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lanemon/monitor.hpp"
#include "lanemon/mutate.hpp"
#include "lanemon/nn.hpp"

namespace lanemon::baselines {

// ---------------------------------------------------------------------------
// Reconstruction-error monitor.

// Autoencoder input: the frame converted to grayscale (channel mean) and
// reduced by `down` via block means, flattened row-major to values in [0,1].
// Image dimensions must divide evenly.
Eigen::VectorXf sae_input(const img::Image& im, int down = 4);

// Mean squared difference over all components, computed in double.
double reconstruction_mse(const Eigen::VectorXf& x, const Eigen::VectorXf& xp);

struct SaeConfig {
  int down = 4;     // camera frames: 120x160 -> 30x40 = 1200 inputs
  int hidden = 64;  // single hidden layer
  nn::TrainConfig train;
};

struct SaeModel {
  nn::Net<float> net;
  int down = 4;
  nn::TrainResult train_result;
};

// Trains the autoencoder to reproduce its own input on the given frames.
// Deterministic under cfg.train.seed; divergence rolls back and is flagged.
SaeModel sae_train(const std::vector<img::Image>& images, const SaeConfig& cfg);

// Reconstruction error of one frame under the trained model.
double sae_score(const SaeModel& model, const img::Image& im);

void save_sae(const SaeModel& model, const std::filesystem::path& path);
SaeModel load_sae(const std::filesystem::path& path, int in_h = 120,
                  int in_w = 160, int hidden = 64, int down = 4);

// ---------------------------------------------------------------------------
// Output-spread monitor.

struct EnsembleConfig {
  int members = 5;              // full-scale default is 10
  double train_fraction = 0.9;  // per-member training subset
  nn::TrainConfig train;
  std::uint64_t seed = 0;
};

struct Ensemble {
  nn::NetSpec spec;
  std::vector<nn::Net<float>> members;
};

// Trains `members` controllers that share the architecture but differ in
// weight seed and in which samples they see. Needs at least two members.
Ensemble ensemble_train(const nn::NetSpec& spec, const nn::ImageDataset& data,
                        const EnsembleConfig& cfg);

// Population standard deviation (divisor n, not n-1), computed in double.
// This is the score definition applied to the members' steering outputs.
double population_std(const std::vector<double>& values);

// Population standard deviation of the members' steering outputs for one
// frame. Zero for unanimous pools; invariant under member reordering.
double ensemble_score(const std::vector<nn::Net<float>>& members,
                      const img::Image& im);

void save_ensemble(const Ensemble& e, const std::filesystem::path& dir);
Ensemble load_ensemble(const nn::NetSpec& spec,
                       const std::filesystem::path& dir);

// The spread monitor for a mutant subject uses that mutant's own trained
// models: all pool members under (op, param). Fails if the pool has fewer
// than two such models.
Ensemble ensemble_for_mutant(const mutate::MutantPool& pool,
                             const nn::NetSpec& spec, mutate::Operator op,
                             double param);

// ---------------------------------------------------------------------------
// Replay adapters.

class SaeOracle : public monitor::Oracle {
 public:
  explicit SaeOracle(SaeModel model)
      : id_("selforacle/sae"), model_(std::move(model)) {}
  const std::string& id() const override { return id_; }
  double raw_score(const img::Image& frame, std::uint64_t) override {
    return sae_score(model_, frame);
  }

 private:
  std::string id_;
  SaeModel model_;
};

class EnsembleOracle : public monitor::Oracle {
 public:
  explicit EnsembleOracle(Ensemble ensemble)
      : id_("ensemble"), ensemble_(std::move(ensemble)) {}
  const std::string& id() const override { return id_; }
  double raw_score(const img::Image& frame, std::uint64_t) override {
    return ensemble_score(ensemble_.members, frame);
  }

 private:
  std::string id_;
  Ensemble ensemble_;
};

}  // namespace lanemon::baselines

#endif  // LANEMON_BASELINES_HPP_
