// lanemon/mutate.hpp
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
// Training-time fault injection: builds deliberately defective controller
// models by perturbing the training configuration or the training data, then
// trains a pool of such models for use as known-bad subjects.
//
// Three operators:
//   HLR - replaces the learning rate.
//   TAN - replaces a fixed fraction of pixels in every training image with
//         uniform random RGB values.
//   TCL - replaces the steering label of a fixed fraction of samples with a
//         uniform random value in [-1, 1]; throttle labels stay bit-identical.
//
// Every random choice is a pure function of (seed, parameter, dataset size),
// so rebuilding a pool reproduces byte-identical weight files.

#ifndef LANEMON_MUTATE_HPP_
#define LANEMON_MUTATE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lanemon/nn.hpp"

namespace lanemon::mutate {

enum class Operator { kHLR, kTAN, kTCL };
inline constexpr int kOperatorCount = 3;

const char* operator_name(Operator op);  // "HLR" | "TAN" | "TCL"
Operator operator_from_name(const std::string& name);

struct MutationSpec {
  Operator op = Operator::kHLR;
  double param = 0.0;          // HLR: new learning rate; TAN/TCL: fraction
  std::uint64_t model_seed = 0;  // base seed; per-model seeds derive from it

  // Stable lowercase identifier, e.g. "hlr-0.01" or "tan-0.15"; used for
  // weight file names and pool lookups.
  std::string tag() const;
};

// The six canonical specs (two parameterizations per operator), with
// model_seed derived from the run seed and the spec tag.
std::vector<MutationSpec> default_mutation_specs(std::uint64_t run_seed);

// HLR only: returns cfg with the learning rate replaced by spec.param and
// every other field unchanged. Rejects non-positive rates.
nn::TrainConfig mutate_config(const nn::TrainConfig& cfg,
                              const MutationSpec& spec);

// TAN/TCL only: returns a mutated copy of the dataset. Size, order, and
// image dimensions never change. The fraction must lie in [0, 1); zero is
// the degenerate edge that returns the dataset unchanged.
//
// TAN draws an independent substream per image and replaces exactly
// round(param * W * H) distinct pixels with uniform RGB. TCL draws one
// substream for the sample selection and replaces exactly round(param * N)
// steering labels with uniform values in [-1, 1].
nn::ImageDataset mutate_dataset(const nn::ImageDataset& data,
                                const MutationSpec& spec, std::uint64_t seed);

struct MutantModel {
  MutationSpec spec;
  int index = 0;                   // model number within its spec
  std::uint64_t train_seed = 0;    // weight init + batch shuffling
  std::uint64_t data_seed = 0;     // dataset mutation stream (0 for HLR)
  std::string weight_file;         // file name inside the pool directory
  bool diverged = false;
  double final_loss = 0.0;         // last finite epoch loss
};

struct MutantPool {
  std::filesystem::path dir;
  int models_per_spec = 0;
  std::vector<MutantModel> models;

  // All models trained under (op, param), in index order.
  std::vector<const MutantModel*> find(Operator op, double param) const;
  std::filesystem::path weight_path(const MutantModel& m) const {
    return dir / m.weight_file;
  }
};

// Trains models_per_spec models per spec, each with a distinct derived seed,
// and persists the weights plus a manifest under `dir`. Divergent trainings
// keep their rolled-back weights, get flagged, and the build continues.
// Existing weight files with a matching architecture are reused unless
// force_retrain is set; either way the result is byte-identical.
MutantPool build_mutant_pool(const nn::NetSpec& net,
                             const nn::ImageDataset& data,
                             const nn::TrainConfig& base_cfg,
                             const std::vector<MutationSpec>& specs,
                             int models_per_spec,
                             const std::filesystem::path& dir,
                             bool force_retrain = false);

// Manifest I/O ("pool.json" inside the pool directory).
void save_pool_manifest(const MutantPool& pool);
MutantPool load_mutant_pool(const std::filesystem::path& dir);

}  // namespace lanemon::mutate

#endif  // LANEMON_MUTATE_HPP_
