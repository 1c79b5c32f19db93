// lanemon/mutate.cpp
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

#include "lanemon/mutate.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lanemon/common.hpp"
#include "lanemon/rng.hpp"

namespace lanemon::mutate {

using json = nlohmann::json;

const char* operator_name(Operator op) {
  switch (op) {
    case Operator::kHLR: return "HLR";
    case Operator::kTAN: return "TAN";
    case Operator::kTCL: return "TCL";
  }
  throw std::logic_error("bad operator enum");
}

Operator operator_from_name(const std::string& name) {
  for (int i = 0; i < kOperatorCount; ++i) {
    Operator op = static_cast<Operator>(i);
    if (name == operator_name(op)) return op;
  }
  throw std::invalid_argument("unknown mutation operator: " + name);
}

std::string MutationSpec::tag() const {
  std::string lower = operator_name(op);
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  return strfmt("%s-%g", lower.c_str(), param);
}

std::vector<MutationSpec> default_mutation_specs(std::uint64_t run_seed) {
  std::vector<MutationSpec> specs;
  auto add = [&](Operator op, double param) {
    MutationSpec s{op, param, 0};
    s.model_seed = derive_seed(run_seed, "mutant:" + s.tag());
    specs.push_back(s);
  };
  add(Operator::kHLR, 0.0001);
  add(Operator::kHLR, 0.01);
  add(Operator::kTAN, 0.15);
  add(Operator::kTAN, 0.25);
  add(Operator::kTCL, 0.15);
  add(Operator::kTCL, 0.20);
  return specs;
}

nn::TrainConfig mutate_config(const nn::TrainConfig& cfg,
                              const MutationSpec& spec) {
  LANEMON_CHECK(spec.op == Operator::kHLR,
                "mutate_config only accepts the learning-rate operator");
  if (!(spec.param > 0.0) || !std::isfinite(spec.param))
    throw std::invalid_argument(
        strfmt("replacement learning rate must be positive, got %g",
               spec.param));
  nn::TrainConfig out = cfg;
  out.lr = spec.param;
  return out;
}

namespace {

// First k entries of a seeded partial Fisher-Yates shuffle of [0, n).
std::vector<int> pick_distinct(int n, int k, SplitMix64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < k; ++j) {
    int swap_with = j + static_cast<int>(rng.below(
                            static_cast<std::uint64_t>(n - j)));
    std::swap(idx[j], idx[swap_with]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

nn::ImageDataset mutate_dataset(const nn::ImageDataset& data,
                                const MutationSpec& spec,
                                std::uint64_t seed) {
  LANEMON_CHECK(spec.op == Operator::kTAN || spec.op == Operator::kTCL,
                "mutate_dataset only accepts the data operators");
  if (!(spec.param >= 0.0 && spec.param < 1.0))
    throw std::invalid_argument(
        strfmt("mutation fraction must lie in [0, 1), got %g", spec.param));

  nn::ImageDataset out = data;
  if (spec.op == Operator::kTAN) {
    for (size_t i = 0; i < out.images.size(); ++i) {
      img::Image& im = out.images[i];
      const int n_px = im.width * im.height;
      const int k = static_cast<int>(std::lround(spec.param * n_px));
      if (k == 0) continue;
      SplitMix64 rng(derive_seed(seed, "img", static_cast<std::uint64_t>(i)));
      std::vector<int> chosen = pick_distinct(n_px, k, rng);
      for (int p : chosen) {
        std::uint8_t* px = im.data.data() + 3 * static_cast<size_t>(p);
        px[0] = static_cast<std::uint8_t>(rng.below(256));
        px[1] = static_cast<std::uint8_t>(rng.below(256));
        px[2] = static_cast<std::uint8_t>(rng.below(256));
      }
    }
  } else {  // TCL
    const int n = static_cast<int>(out.targets.size());
    const int k = static_cast<int>(std::lround(spec.param * n));
    if (k > 0) {
      SplitMix64 rng(derive_seed(seed, "labels"));
      std::vector<int> chosen = pick_distinct(n, k, rng);
      for (int s : chosen)
        out.targets[s][0] = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
  }
  return out;
}

std::vector<const MutantModel*> MutantPool::find(Operator op,
                                                 double param) const {
  std::vector<const MutantModel*> out;
  for (const MutantModel& m : models)
    if (m.spec.op == op && m.spec.param == param) out.push_back(&m);
  return out;
}

MutantPool build_mutant_pool(const nn::NetSpec& net,
                             const nn::ImageDataset& data,
                             const nn::TrainConfig& base_cfg,
                             const std::vector<MutationSpec>& specs,
                             int models_per_spec,
                             const std::filesystem::path& dir,
                             bool force_retrain) {
  LANEMON_CHECK(models_per_spec >= 1, "need at least one model per spec");
  LANEMON_CHECK(!specs.empty(), "need at least one mutation spec");
  std::filesystem::create_directories(dir);

  MutantPool pool;
  pool.dir = dir;
  pool.models_per_spec = models_per_spec;

  for (const MutationSpec& spec : specs) {
    for (int i = 0; i < models_per_spec; ++i) {
      MutantModel m;
      m.spec = spec;
      m.index = i;
      m.train_seed =
          derive_seed(spec.model_seed, "train", static_cast<std::uint64_t>(i));
      m.data_seed =
          spec.op == Operator::kHLR
              ? 0
              : derive_seed(spec.model_seed, "data",
                            static_cast<std::uint64_t>(i));
      m.weight_file = strfmt("%s-m%02d.lmw", spec.tag().c_str(), i);

      const std::filesystem::path wpath = dir / m.weight_file;
      bool reused = false;
      if (!force_retrain && std::filesystem::exists(wpath)) {
        try {
          nn::NetMeta meta;
          nn::load_net(net, wpath, &meta);
          m.diverged = meta.diverged;
          m.final_loss = meta.final_loss;
          reused = true;
        } catch (const std::exception&) {
          reused = false;  // stale or foreign file: retrain over it
        }
      }

      if (!reused) {
        nn::TrainConfig cfg = spec.op == Operator::kHLR
                                  ? mutate_config(base_cfg, spec)
                                  : base_cfg;
        cfg.seed = m.train_seed;

        const nn::ImageDataset* train_set = &data;
        nn::ImageDataset mutated;
        if (spec.op != Operator::kHLR) {
          mutated = mutate_dataset(data, spec, m.data_seed);
          train_set = &mutated;
        }

        nn::Net<float> model(net);
        model.init_weights(m.train_seed);
        nn::TrainResult tr =
            nn::train_sgd(&model, static_cast<int>(train_set->images.size()),
                          nn::make_image_batch_fill(*train_set), cfg);
        m.diverged = tr.diverged;
        m.final_loss =
            tr.kept_epochs > 0 ? tr.epoch_loss[tr.kept_epochs - 1] : 0.0;

        nn::NetMeta meta;
        meta.seed = m.train_seed;
        meta.epochs = tr.kept_epochs;
        meta.diverged = tr.diverged;
        meta.final_loss = m.final_loss;
        nn::save_net(model, meta, wpath);
      }
      pool.models.push_back(std::move(m));
    }
  }

  save_pool_manifest(pool);
  return pool;
}

void save_pool_manifest(const MutantPool& pool) {
  json models = json::array();
  for (const MutantModel& m : pool.models) {
    models.push_back({{"operator", operator_name(m.spec.op)},
                      {"param", m.spec.param},
                      {"model_seed", m.spec.model_seed},
                      {"index", m.index},
                      {"train_seed", m.train_seed},
                      {"data_seed", m.data_seed},
                      {"weight_file", m.weight_file},
                      {"diverged", m.diverged},
                      {"final_loss", m.final_loss}});
  }
  json doc = {{"version", 1},
              {"models_per_spec", pool.models_per_spec},
              {"models", models}};
  write_file_atomic(pool.dir / "pool.json", doc.dump(2) + "\n");
}

MutantPool load_mutant_pool(const std::filesystem::path& dir) {
  const std::filesystem::path mpath = dir / "pool.json";
  if (!std::filesystem::exists(mpath))
    throw std::runtime_error("no mutant pool manifest at " + mpath.string());
  json doc = json::parse(read_text_file(mpath));

  MutantPool pool;
  pool.dir = dir;
  pool.models_per_spec = doc.at("models_per_spec").get<int>();
  for (const json& j : doc.at("models")) {
    MutantModel m;
    m.spec.op = operator_from_name(j.at("operator").get<std::string>());
    m.spec.param = j.at("param").get<double>();
    m.spec.model_seed = j.at("model_seed").get<std::uint64_t>();
    m.index = j.at("index").get<int>();
    m.train_seed = j.at("train_seed").get<std::uint64_t>();
    m.data_seed = j.at("data_seed").get<std::uint64_t>();
    m.weight_file = j.at("weight_file").get<std::string>();
    m.diverged = j.at("diverged").get<bool>();
    m.final_loss = j.at("final_loss").get<double>();
    pool.models.push_back(std::move(m));
  }
  return pool;
}

}  // namespace lanemon::mutate
