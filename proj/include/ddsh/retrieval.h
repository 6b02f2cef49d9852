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

#ifndef DDSH_RETRIEVAL_H_
#define DDSH_RETRIEVAL_H_

// Bit-packed Hamming-space index with full ranking and radius lookup.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ddsh/coder.h"

namespace ddsh {

// Rows packed 64 bits per word; bit k of a row is 1 iff code entry k is +1.
// Padding bits in the last word of each row are zero.
class PackedCodes {
 public:
  PackedCodes() = default;
  PackedCodes(size_t rows, size_t bits, std::vector<uint64_t> words);

  static PackedCodes Pack(const CodeMatrix& codes);
  CodeMatrix Unpack() const;

  size_t rows() const { return rows_; }
  size_t bits() const { return bits_; }
  size_t words_per_row() const { return words_per_row_; }
  std::span<const uint64_t> row(size_t i) const {
    return {words_.data() + i * words_per_row_, words_per_row_};
  }
  const std::vector<uint64_t>& words() const { return words_; }

  friend bool operator==(const PackedCodes&, const PackedCodes&) = default;

 private:
  size_t rows_ = 0;
  size_t bits_ = 0;
  size_t words_per_row_ = 0;
  std::vector<uint64_t> words_;
};

inline size_t WordsForBits(size_t bits) { return (bits + 63) / 64; }

// Popcount of the masked XOR; equals (c - a^T b) / 2 on the unpacked codes.
int HammingDistance(std::span<const uint64_t> a, std::span<const uint64_t> b, size_t bits);

struct RankedItem {
  size_t id;
  int distance;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

// Database ids by ascending (distance, id).
struct Ranking {
  std::vector<RankedItem> items;
};

Ranking Rank(std::span<const uint64_t> query, const PackedCodes& db,
             std::optional<size_t> top_k = std::nullopt);

// Ids with distance <= radius, ascending.
std::vector<size_t> LookupWithinRadius(std::span<const uint64_t> query, const PackedCodes& db,
                                       int radius);

void SaveCodes(const std::filesystem::path& path, const PackedCodes& codes);
PackedCodes LoadCodes(const std::filesystem::path& path);

}  // namespace ddsh

#endif  // DDSH_RETRIEVAL_H_
