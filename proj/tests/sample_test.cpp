// Copyright 2026 The wignerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace wignerlab {
namespace {

std::uint64_t count_of(const SampleResult& s, const std::vector<std::pair<std::string, std::string>>& terms) {
  std::uint64_t n = 0;
  for (const auto& [t, c] : s.counts) {
    bool ok = true;
    for (const auto& [rec, label] : terms) {
      const std::size_t r = s.compiled->record_index(rec);
      ok = ok && t[r] && *t[r] == s.compiled->label_index(r, label);
    }
    if (ok) n += c;
  }
  return n;
}

// Reference values of the published SplitMix64 generator for seed 0.
TEST(Rng, SplitMix64ReferenceSequence) {
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(g(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(g(), 0x06C45D188009454FULL);
}

TEST(Rng, UniformRangeAndStreamsDiffer) {
  SplitMix64 g(42);
  for (int k = 0; k < 1000; ++k) {
    const double u = g.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  auto a = repetition_stream(7, 0);
  auto b = repetition_stream(7, 1);
  EXPECT_NE(a(), b());
  auto c = repetition_stream(7, 0);
  auto d = repetition_stream(7, 0);
  EXPECT_EQ(c(), d());
}

TEST(Sample, SingleRepetitionHasSupport) {
  const Scenario s = build_fr_scenario();
  const RunResult r = evaluate(s, Policy::kUnitaryAgents);
  const SampleResult one = sample(r, 1, 123);
  ASSERT_EQ(one.counts.size(), 1u);
  EXPECT_TRUE(r.joint.count(one.counts.begin()->first));
  EXPECT_THROW(sample(r, 0, 1), ArgumentError);
}

TEST(Sample, DeterministicGivenSeed) {
  const Scenario s = build_fr_scenario();
  EXPECT_EQ(sample(s, Policy::kUnitaryAgents, 5000, 9).counts, sample(s, Policy::kUnitaryAgents, 5000, 9).counts);
  EXPECT_NE(sample(s, Policy::kUnitaryAgents, 5000, 9).counts, sample(s, Policy::kUnitaryAgents, 5000, 10).counts);
}

TEST(Sample, CertainOutcomeIsAlwaysDrawn) {
  const Scenario s = build_footnote_paradox();
  const SampleResult r = sample(s, Policy::kUnitaryAgents, 2000, 5);
  EXPECT_EQ(count_of(r, {{"W1", "plus"}}), 2000u);
}

TEST(Sample, FrOkOkWithinThreeSigmaForOneSeed) {
  const std::uint64_t n = 120000;
  const double p = 1.0 / 12;
  const SampleResult r = sample(build_fr_scenario(), Policy::kUnitaryAgents, n, 2026);
  const double f = static_cast<double>(count_of(r, {{"Wbar", "ok"}, {"W", "ok"}})) / static_cast<double>(n);
  EXPECT_LE(std::abs(f - p), 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)));
}

TEST(Sample, EveryOutcomeWithinFourSigmaOverTwentySeedsProperty) {
  const std::uint64_t n = 20000;
  for (const Scenario& s : {build_fr_scenario(), build_footnote_paradox(2)}) {
    for (Policy pol : {Policy::kUnitaryAgents, Policy::kCollapseOnRecord}) {
      const RunResult r = evaluate(s, pol);
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SampleResult smp = sample(r, n, seed);
        for (const auto& [t, p] : r.joint) {
          auto it = smp.counts.find(t);
          const double f = it == smp.counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
          EXPECT_LE(std::abs(f - p), 4.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)) + 1e-12);
        }
      }
    }
  }
}

}  // namespace
}  // namespace wignerlab
