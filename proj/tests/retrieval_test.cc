// Copyright 2026 The DDSH Authors.
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

#include "ddsh/retrieval.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "ddsh/errors.h"
#include "oracles.h"

namespace ddsh {
namespace {

namespace fs = std::filesystem;

CodeMatrix FromInt(const testing::IntCodes& codes) {
  std::vector<int8_t> flat;
  for (const auto& row : codes) flat.insert(flat.end(), row.begin(), row.end());
  return CodeMatrix(codes.size(), codes.front().size(), std::move(flat));
}

TEST(HammingTest, IdenticalAndOpposite) {
  std::vector<int8_t> plus(12, 1);
  std::vector<int8_t> minus(12, -1);
  std::vector<int8_t> flat = plus;
  flat.insert(flat.end(), minus.begin(), minus.end());
  const auto packed = PackedCodes::Pack(CodeMatrix(2, 12, flat));
  EXPECT_EQ(HammingDistance(packed.row(0), packed.row(0), 12), 0);
  EXPECT_EQ(HammingDistance(packed.row(0), packed.row(1), 12), 12);
}

TEST(HammingTest, PackedMatchesUnpacked) {
  std::mt19937_64 rng(1);
  for (const size_t c : {1, 12, 24, 32, 48, 63, 64, 65, 130}) {
    const auto codes = testing::RandomIntCodes(rng, 40, c);
    const auto packed = PackedCodes::Pack(FromInt(codes));
    EXPECT_EQ(packed.words_per_row(), WordsForBits(c));
    for (size_t i = 0; i < 40; ++i) {
      for (size_t j = 0; j < 40; ++j) {
        EXPECT_EQ(HammingDistance(packed.row(i), packed.row(j), c),
                  testing::UnpackedHamming(codes[i], codes[j]));
      }
    }
  }
}

TEST(HammingTest, IsAMetric) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t c = 1 + rng() % 100;
    const auto packed = PackedCodes::Pack(FromInt(testing::RandomIntCodes(rng, 3, c)));
    const int ab = HammingDistance(packed.row(0), packed.row(1), c);
    const int bc = HammingDistance(packed.row(1), packed.row(2), c);
    const int ac = HammingDistance(packed.row(0), packed.row(2), c);
    EXPECT_EQ(ab, HammingDistance(packed.row(1), packed.row(0), c));
    EXPECT_LE(ac, ab + bc);
    EXPECT_EQ(ab == 0, std::equal(packed.row(0).begin(), packed.row(0).end(),
                                  packed.row(1).begin()));
  }
}

TEST(HammingTest, RejectsLengthMismatch) {
  const std::vector<uint64_t> one = {0};
  const std::vector<uint64_t> two = {0, 0};
  EXPECT_THROW(HammingDistance(one, two, 12), DataError);
}

TEST(PackedCodesTest, PackUnpackRoundTrip) {
  std::mt19937_64 rng(3);
  for (const size_t c : {5, 64, 100}) {
    const auto codes = FromInt(testing::RandomIntCodes(rng, 17, c));
    const auto packed = PackedCodes::Pack(codes);
    EXPECT_EQ(packed.Unpack(), codes);
  }
}

TEST(PackedCodesTest, BitOneMeansPlusOneAndPaddingIsZero) {
  const auto packed = PackedCodes::Pack(CodeMatrix(1, 3, {1, -1, 1}));
  ASSERT_EQ(packed.words().size(), 1u);
  EXPECT_EQ(packed.words()[0], 0b101u);
  EXPECT_THROW(PackedCodes(1, 3, {0b1000}), DataError);
}

TEST(RankTest, ExactCodeFirstAmongTies) {
  const auto db = PackedCodes::Pack(CodeMatrix(4, 3, {-1, -1, -1, 1, 1, 1, 1, 1, 1, 1, -1, 1}));
  const auto query = PackedCodes::Pack(CodeMatrix(1, 3, {1, 1, 1}));
  const auto ranking = Rank(query.row(0), db);
  ASSERT_EQ(ranking.items.size(), 4u);
  EXPECT_EQ(ranking.items[0], (RankedItem{1, 0}));
  EXPECT_EQ(ranking.items[1], (RankedItem{2, 0}));
  EXPECT_EQ(ranking.items[2], (RankedItem{3, 1}));
  EXPECT_EQ(ranking.items[3], (RankedItem{0, 3}));
  EXPECT_EQ(Rank(query.row(0), db, 2).items.size(), 2u);
}

TEST(RankTest, SingletonDatabase) {
  const auto db = PackedCodes::Pack(CodeMatrix(1, 5));
  const auto ranking = Rank(db.row(0), db);
  ASSERT_EQ(ranking.items.size(), 1u);
  EXPECT_EQ(ranking.items[0], (RankedItem{0, 0}));
}

TEST(RankTest, MatchesNaiveSort) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t c = 8 + rng() % 40;
    const auto db_int = testing::RandomIntCodes(rng, 100, c);
    const auto q_int = testing::RandomIntCodes(rng, 1, c);
    const auto db = PackedCodes::Pack(FromInt(db_int));
    const auto query = PackedCodes::Pack(FromInt(q_int));
    std::vector<std::pair<int, size_t>> naive;
    for (size_t i = 0; i < 100; ++i) {
      naive.emplace_back(testing::UnpackedHamming(q_int[0], db_int[i]), i);
    }
    std::sort(naive.begin(), naive.end());
    const auto ranking = Rank(query.row(0), db);
    ASSERT_EQ(ranking.items.size(), 100u);
    for (size_t r = 0; r < 100; ++r) {
      EXPECT_EQ(ranking.items[r].id, naive[r].second);
      EXPECT_EQ(ranking.items[r].distance, naive[r].first);
    }
  }
}

TEST(RankTest, PermutationInvariantUpToTies) {
  std::mt19937_64 rng(5);
  const auto db_int = testing::RandomIntCodes(rng, 60, 10);
  const auto q_int = testing::RandomIntCodes(rng, 1, 10);
  std::vector<size_t> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  testing::IntCodes shuffled;
  for (const size_t i : perm) shuffled.push_back(db_int[i]);
  const auto query = PackedCodes::Pack(FromInt(q_int));
  const auto a = Rank(query.row(0), PackedCodes::Pack(FromInt(db_int)));
  const auto b = Rank(query.row(0), PackedCodes::Pack(FromInt(shuffled)));
  for (size_t r = 0; r < 60; ++r) EXPECT_EQ(a.items[r].distance, b.items[r].distance);
  // Same multiset of original ids per distance.
  for (int d = 0; d <= 10; ++d) {
    std::vector<size_t> ia, ib;
    for (const auto& it : a.items) {
      if (it.distance == d) ia.push_back(it.id);
    }
    for (const auto& it : b.items) {
      if (it.distance == d) ib.push_back(perm[it.id]);
    }
    std::sort(ib.begin(), ib.end());
    EXPECT_EQ(ia, ib);
  }
}

TEST(LookupTest, RadiusBounds) {
  std::mt19937_64 rng(6);
  const auto db = PackedCodes::Pack(FromInt(testing::RandomIntCodes(rng, 30, 9)));
  std::vector<size_t> all(30);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(LookupWithinRadius(db.row(0), db, 9), all);
  EXPECT_THROW(LookupWithinRadius(db.row(0), db, 10), DataError);
  EXPECT_THROW(LookupWithinRadius(db.row(0), db, -1), DataError);
}

TEST(LookupTest, EmptyAtRadiusZeroForAbsentCode) {
  const auto db = PackedCodes::Pack(CodeMatrix(2, 2, {1, 1, -1, -1}));
  const auto query = PackedCodes::Pack(CodeMatrix(1, 2, {1, -1}));
  EXPECT_TRUE(LookupWithinRadius(query.row(0), db, 0).empty());
  EXPECT_EQ(LookupWithinRadius(query.row(0), db, 1), (std::vector<size_t>{0, 1}));
}

TEST(LookupTest, ConsistentWithRank) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t c = 12;
    const auto db = PackedCodes::Pack(FromInt(testing::RandomIntCodes(rng, 80, c)));
    const auto query = PackedCodes::Pack(FromInt(testing::RandomIntCodes(rng, 1, c)));
    const auto ranking = Rank(query.row(0), db);
    for (int r = 0; r <= static_cast<int>(c); ++r) {
      std::vector<size_t> expected;
      for (const auto& it : ranking.items) {
        if (it.distance <= r) expected.push_back(it.id);
      }
      std::sort(expected.begin(), expected.end());
      EXPECT_EQ(LookupWithinRadius(query.row(0), db, r), expected);
    }
  }
}

TEST(CodesFileTest, RoundTrip) {
  std::mt19937_64 rng(8);
  const auto packed = PackedCodes::Pack(FromInt(testing::RandomIntCodes(rng, 9, 70)));
  const auto path = fs::temp_directory_path() / "ddsh_retrieval_codes.ddbc";
  SaveCodes(path, packed);
  EXPECT_EQ(LoadCodes(path), packed);
  fs::resize_file(path, fs::file_size(path) - 3);
  EXPECT_THROW(LoadCodes(path), DataError);
  fs::remove(path);
}

}  // namespace
}  // namespace ddsh
