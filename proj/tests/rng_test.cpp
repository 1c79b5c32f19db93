// tests/rng_test.cpp
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

#include <doctest.h>

#include <cmath>
#include <set>

#include "lanemon/rng.hpp"

using lanemon::SplitMix64;
using lanemon::derive_seed;

TEST_SUITE("rng") {

TEST_CASE("splitmix64 reference stream") {
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFULL);
  CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(g.next() == 0x06C45D188009454FULL);
}

TEST_CASE("uniform stays in range and reproduces") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
}

TEST_CASE("bounded uniform respects interval") {
  SplitMix64 g(7);
  for (int i = 0; i < 1000; ++i) {
    double u = g.uniform(-0.2, 0.2);
    CHECK(u >= -0.2);
    CHECK(u <= 0.2);
  }
}

TEST_CASE("normal moments") {
  SplitMix64 g(123);
  double sum = 0, sum2 = 0;
  int n = 50000;
  for (int i = 0; i < n; ++i) {
    double v = g.normal();
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("poisson mean tracks lambda across the cutover") {
  for (double lambda : {0.5, 4.0, 25.0, 80.0}) {
    SplitMix64 g(99);
    double sum = 0;
    int n = 20000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(g.poisson(lambda));
    double mean = sum / n;
    CHECK(std::fabs(mean - lambda) < 0.05 * lambda + 0.05);
  }
}

TEST_CASE("poisson of zero is zero") {
  SplitMix64 g(1);
  CHECK(g.poisson(0.0) == 0);
  CHECK(g.poisson(-1.0) == 0);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  SplitMix64 g(5);
  g.shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 100);
  std::vector<int> w(100);
  for (int i = 0; i < 100; ++i) w[i] = i;
  SplitMix64 h(5);
  h.shuffle(w);
  CHECK(v == w);
  bool moved = false;
  for (int i = 0; i < 100; ++i) moved = moved || v[i] != i;
  CHECK(moved);
}

TEST_CASE("derive_seed separates tags and indices") {
  auto a = derive_seed(1, "alpha", 0);
  CHECK(a == derive_seed(1, "alpha", 0));
  CHECK(a != derive_seed(1, "beta", 0));
  CHECK(a != derive_seed(1, "alpha", 1));
  CHECK(a != derive_seed(2, "alpha", 0));
}

}  // TEST_SUITE
