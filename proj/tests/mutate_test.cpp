// tests/mutate_test.cpp
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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "lanemon/common.hpp"
#include "lanemon/rng.hpp"

namespace fs = std::filesystem;
using namespace lanemon;
using namespace lanemon::mutate;

namespace {

nn::ImageDataset tiny_dataset(int n, int h, int w, std::uint64_t seed) {
  nn::ImageDataset ds;
  ds.in_ch = 3;
  ds.in_h = h;
  ds.in_w = w;
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i) {
    img::Image im(w, h, 3);
    for (std::uint8_t& b : im.data)
      b = static_cast<std::uint8_t>(rng.below(256));
    ds.images.push_back(std::move(im));
    ds.targets.push_back({static_cast<float>(rng.uniform(-1.0, 1.0)),
                          static_cast<float>(rng.uniform(0.0, 1.0))});
  }
  return ds;
}

int pixels_differing(const img::Image& a, const img::Image& b) {
  int n = 0;
  for (int p = 0; p < a.width * a.height; ++p) {
    size_t off = 3 * static_cast<size_t>(p);
    if (a.data[off] != b.data[off] || a.data[off + 1] != b.data[off + 1] ||
        a.data[off + 2] != b.data[off + 2])
      ++n;
  }
  return n;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path fresh_dir(const char* leaf) {
  fs::path d = fs::temp_directory_path() / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("mutate") {

TEST_CASE("operator names round trip and reject unknowns") {
  CHECK(operator_from_name("HLR") == Operator::kHLR);
  CHECK(operator_from_name("TAN") == Operator::kTAN);
  CHECK(operator_from_name("TCL") == Operator::kTCL);
  for (int i = 0; i < kOperatorCount; ++i) {
    Operator op = static_cast<Operator>(i);
    CHECK(operator_from_name(operator_name(op)) == op);
  }
  CHECK_THROWS_AS(operator_from_name("NAI"), std::invalid_argument);
  CHECK_THROWS_AS(operator_from_name(""), std::invalid_argument);
  CHECK(MutationSpec{Operator::kHLR, 0.0001, 0}.tag() == "hlr-0.0001");
  CHECK(MutationSpec{Operator::kTAN, 0.25, 0}.tag() == "tan-0.25");
  CHECK(MutationSpec{Operator::kTCL, 0.20, 0}.tag() == "tcl-0.2");
}

TEST_CASE("default spec list covers three operators twice with distinct seeds") {
  auto specs = default_mutation_specs(42);
  REQUIRE(specs.size() == 6);
  std::set<std::string> tags;
  std::set<std::uint64_t> seeds;
  for (const auto& s : specs) {
    tags.insert(s.tag());
    seeds.insert(s.model_seed);
  }
  CHECK(tags.size() == 6);
  CHECK(seeds.size() == 6);
  // Same run seed reproduces the same derivations; another seed does not.
  CHECK(default_mutation_specs(42)[3].model_seed == specs[3].model_seed);
  CHECK(default_mutation_specs(43)[3].model_seed != specs[3].model_seed);
}

TEST_CASE("learning-rate mutation replaces exactly one field") {
  nn::TrainConfig cfg;
  cfg.epochs = 7;
  cfg.lr = 0.001;
  cfg.batch = 9;
  cfg.seed = 555;

  SUBCASE("raises and lowers the rate") {
    auto hi = mutate_config(cfg, {Operator::kHLR, 0.01, 0});
    CHECK(hi.lr == 0.01);
    auto lo = mutate_config(cfg, {Operator::kHLR, 0.0001, 0});
    CHECK(lo.lr == 0.0001);
    CHECK(hi.epochs == 7);
    CHECK(hi.batch == 9);
    CHECK(hi.seed == 555);
  }
  SUBCASE("rejects data operators") {
    CHECK_THROWS_AS(mutate_config(cfg, {Operator::kTAN, 0.15, 0}),
                    std::logic_error);
    CHECK_THROWS_AS(mutate_config(cfg, {Operator::kTCL, 0.15, 0}),
                    std::logic_error);
  }
  SUBCASE("rejects non-positive rates") {
    CHECK_THROWS_AS(mutate_config(cfg, {Operator::kHLR, 0.0, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mutate_config(cfg, {Operator::kHLR, -0.01, 0}),
                    std::invalid_argument);
  }
}

TEST_CASE("pixel noise hits an exact count per image and nothing else") {
  auto ds = tiny_dataset(3, 8, 10, 11);
  MutationSpec spec{Operator::kTAN, 0.25, 0};
  auto out = mutate_dataset(ds, spec, 900);

  REQUIRE(out.images.size() == ds.images.size());
  REQUIRE(out.targets.size() == ds.targets.size());
  const int expect = 20;  // 0.25 * 80 pixels
  for (size_t i = 0; i < ds.images.size(); ++i) {
    CHECK(out.images[i].width == ds.images[i].width);
    CHECK(out.images[i].height == ds.images[i].height);
    // A replacement drawing the original color would undercount; with these
    // seeds every chosen pixel lands on a fresh value.
    CHECK(pixels_differing(ds.images[i], out.images[i]) == expect);
  }
  // Labels are untouched by the pixel operator.
  CHECK(std::memcmp(ds.targets.data(), out.targets.data(),
                    ds.targets.size() * sizeof(ds.targets[0])) == 0);

  SUBCASE("same seed reproduces, another seed differs") {
    auto again = mutate_dataset(ds, spec, 900);
    CHECK(again.images[0] == out.images[0]);
    CHECK(again.images[2] == out.images[2]);
    auto other = mutate_dataset(ds, spec, 901);
    CHECK(other.images[0] != out.images[0]);
  }
  SUBCASE("images get independent pixel sets") {
    CHECK(pixels_differing(out.images[0], out.images[1]) > 0);
    // The changed masks should not be identical across images.
    int same_mask = 0;
    for (int p = 0; p < 80; ++p) {
      bool c0 = false, c1 = false;
      for (int c = 0; c < 3; ++c) {
        size_t off = 3 * static_cast<size_t>(p) + c;
        c0 |= ds.images[0].data[off] != out.images[0].data[off];
        c1 |= ds.images[1].data[off] != out.images[1].data[off];
      }
      same_mask += (c0 == c1);
    }
    CHECK(same_mask < 80);
  }
}

TEST_CASE("label shuffle alters an exact sample count, steering only") {
  auto ds = tiny_dataset(10, 4, 5, 22);
  MutationSpec spec{Operator::kTCL, 0.20, 0};
  auto out = mutate_dataset(ds, spec, 77);

  int changed = 0;
  for (size_t i = 0; i < ds.targets.size(); ++i) {
    if (ds.targets[i][0] != out.targets[i][0]) {
      ++changed;
      CHECK(out.targets[i][0] >= -1.0f);
      CHECK(out.targets[i][0] <= 1.0f);
    }
    // Throttle labels are bit-identical everywhere.
    CHECK(std::memcmp(&ds.targets[i][1], &out.targets[i][1], sizeof(float)) ==
          0);
    CHECK(ds.images[i] == out.images[i]);
  }
  CHECK(changed == 2);  // 0.20 * 10

  SUBCASE("zero fraction is the identity") {
    auto id = mutate_dataset(ds, {Operator::kTCL, 0.0, 0}, 77);
    CHECK(std::memcmp(ds.targets.data(), id.targets.data(),
                      ds.targets.size() * sizeof(ds.targets[0])) == 0);
  }
  SUBCASE("altered indices are stable across reruns") {
    auto again = mutate_dataset(ds, spec, 77);
    for (size_t i = 0; i < ds.targets.size(); ++i)
      CHECK(again.targets[i][0] == out.targets[i][0]);
  }
}

TEST_CASE("data mutation rejects fractions outside the unit interval") {
  auto ds = tiny_dataset(2, 4, 5, 3);
  CHECK_THROWS_AS(mutate_dataset(ds, {Operator::kTAN, 1.0, 0}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(mutate_dataset(ds, {Operator::kTCL, -0.1, 0}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(mutate_dataset(ds, {Operator::kHLR, 0.5, 0}, 1),
                  std::logic_error);
}

TEST_CASE("pool build trains, persists, reloads, and reproduces") {
  auto ds = tiny_dataset(12, 9, 11, 5);
  nn::NetSpec net;
  net.in_ch = 3;
  net.in_h = 9;
  net.in_w = 11;
  net.layers = {nn::LayerSpec::conv(4, 3, 3, 2, nn::Act::kRelu),
                nn::LayerSpec::flatten(),
                nn::LayerSpec::dense(2, nn::Act::kControlHead)};
  nn::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = 0.001;
  cfg.batch = 4;

  std::vector<MutationSpec> specs = {{Operator::kHLR, 0.01, 101},
                                     {Operator::kTCL, 0.2, 202}};
  fs::path dir = fresh_dir("lanemon-mutate-pool");
  MutantPool pool = build_mutant_pool(net, ds, cfg, specs, 2, dir);

  REQUIRE(pool.models.size() == 4);
  std::set<std::uint64_t> seeds;
  for (const auto& m : pool.models) {
    seeds.insert(m.train_seed);
    CHECK(fs::exists(pool.weight_path(m)));
    nn::NetMeta meta;
    nn::Net<float> loaded = nn::load_net(net, pool.weight_path(m), &meta);
    CHECK(meta.seed == m.train_seed);
    CHECK(loaded.finite());
  }
  CHECK(seeds.size() == 4);  // every model trains under its own seed

  SUBCASE("manifest reloads to the same pool") {
    MutantPool back = load_mutant_pool(dir);
    REQUIRE(back.models.size() == pool.models.size());
    CHECK(back.models_per_spec == 2);
    for (size_t i = 0; i < pool.models.size(); ++i) {
      CHECK(back.models[i].spec.op == pool.models[i].spec.op);
      CHECK(back.models[i].spec.param == pool.models[i].spec.param);
      CHECK(back.models[i].train_seed == pool.models[i].train_seed);
      CHECK(back.models[i].data_seed == pool.models[i].data_seed);
      CHECK(back.models[i].weight_file == pool.models[i].weight_file);
      CHECK(back.models[i].diverged == pool.models[i].diverged);
      CHECK(back.models[i].final_loss == pool.models[i].final_loss);
    }
    CHECK_THROWS_AS(load_mutant_pool(dir / "nope"), std::runtime_error);
  }
  SUBCASE("rebuilds are byte-identical, with and without reuse") {
    std::vector<std::string> first;
    for (const auto& m : pool.models)
      first.push_back(file_bytes(pool.weight_path(m)));

    MutantPool reuse = build_mutant_pool(net, ds, cfg, specs, 2, dir);
    for (size_t i = 0; i < reuse.models.size(); ++i)
      CHECK(file_bytes(reuse.weight_path(reuse.models[i])) == first[i]);

    MutantPool forced =
        build_mutant_pool(net, ds, cfg, specs, 2, dir, /*force_retrain=*/true);
    for (size_t i = 0; i < forced.models.size(); ++i)
      CHECK(file_bytes(forced.weight_path(forced.models[i])) == first[i]);
  }
  SUBCASE("lookup by operator and parameter") {
    auto hit = pool.find(Operator::kTCL, 0.2);
    REQUIRE(hit.size() == 2);
    CHECK(hit[0]->index == 0);
    CHECK(hit[1]->index == 1);
    CHECK(pool.find(Operator::kTAN, 0.15).empty());
  }
}

TEST_CASE("divergent members stay in the pool with the flag raised") {
  auto ds = tiny_dataset(8, 4, 5, 9);
  // A linear head can blow past float range; the bounded control head cannot.
  nn::NetSpec net = nn::NetSpec::linear(3 * 4 * 5, 2);
  nn::TrainConfig cfg;
  cfg.epochs = 4;
  cfg.lr = 0.001;
  cfg.batch = 4;

  std::vector<MutationSpec> specs = {{Operator::kHLR, 1e9, 303}};
  fs::path dir = fresh_dir("lanemon-mutate-diverge");
  MutantPool pool = build_mutant_pool(net, ds, cfg, specs, 2, dir);

  REQUIRE(pool.models.size() == 2);
  for (const auto& m : pool.models) {
    CHECK(m.diverged);
    // Rolled-back weights still load and stay finite.
    nn::NetMeta meta;
    nn::Net<float> loaded = nn::load_net(net, pool.weight_path(m), &meta);
    CHECK(meta.diverged);
    CHECK(loaded.finite());
  }
  MutantPool back = load_mutant_pool(dir);
  CHECK(back.models[0].diverged);
  CHECK(back.models[1].diverged);
}

}  // TEST_SUITE
