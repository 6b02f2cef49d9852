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

#include <bit>
#include <fstream>
#include <string>

#include "ddsh/binary_io.h"
#include "ddsh/errors.h"

namespace ddsh {
namespace {

constexpr std::string_view kCodesMagic = "DDBC";
constexpr uint32_t kCodesVersion = 1;

uint64_t LastWordMask(size_t bits) {
  const size_t tail = bits % 64;
  return tail == 0 ? ~uint64_t{0} : (uint64_t{1} << tail) - 1;
}

}  // namespace

PackedCodes::PackedCodes(size_t rows, size_t bits, std::vector<uint64_t> words)
    : rows_(rows), bits_(bits), words_per_row_(WordsForBits(bits)), words_(std::move(words)) {
  if (bits_ == 0) throw DataError("code length must be >= 1");
  if (words_.size() != rows_ * words_per_row_) throw DataError("packed code size mismatch");
  const uint64_t mask = LastWordMask(bits_);
  for (size_t i = 0; i < rows_; ++i) {
    if (words_[(i + 1) * words_per_row_ - 1] & ~mask) {
      throw DataError("packed row " + std::to_string(i) + " has non-zero padding bits");
    }
  }
}

PackedCodes PackedCodes::Pack(const CodeMatrix& codes) {
  const size_t wpr = WordsForBits(codes.bits());
  std::vector<uint64_t> words(codes.rows() * wpr, 0);
  for (size_t i = 0; i < codes.rows(); ++i) {
    for (size_t k = 0; k < codes.bits(); ++k) {
      if (codes.at(i, k) > 0) words[i * wpr + k / 64] |= uint64_t{1} << (k % 64);
    }
  }
  return PackedCodes(codes.rows(), codes.bits(), std::move(words));
}

CodeMatrix PackedCodes::Unpack() const {
  std::vector<int8_t> entries(rows_ * bits_);
  for (size_t i = 0; i < rows_; ++i) {
    const auto r = row(i);
    for (size_t k = 0; k < bits_; ++k) {
      entries[i * bits_ + k] = (r[k / 64] >> (k % 64)) & 1U ? int8_t{1} : int8_t{-1};
    }
  }
  return CodeMatrix(rows_, bits_, std::move(entries));
}

int HammingDistance(std::span<const uint64_t> a, std::span<const uint64_t> b, size_t bits) {
  const size_t words = WordsForBits(bits);
  if (a.size() != words || b.size() != words) {
    throw DataError("hamming distance: code length mismatch");
  }
  int dist = 0;
  for (size_t w = 0; w + 1 < words; ++w) dist += std::popcount(a[w] ^ b[w]);
  dist += std::popcount((a[words - 1] ^ b[words - 1]) & LastWordMask(bits));
  return dist;
}

Ranking Rank(std::span<const uint64_t> query, const PackedCodes& db, std::optional<size_t> top_k) {
  // Counting sort on distance keeps ids ascending within each distance.
  const size_t c = db.bits();
  std::vector<int> dist(db.rows());
  std::vector<size_t> count(c + 2, 0);
  for (size_t i = 0; i < db.rows(); ++i) {
    dist[i] = HammingDistance(query, db.row(i), c);
    ++count[static_cast<size_t>(dist[i]) + 1];
  }
  for (size_t d = 1; d < count.size(); ++d) count[d] += count[d - 1];
  Ranking ranking;
  ranking.items.resize(db.rows());
  for (size_t i = 0; i < db.rows(); ++i) {
    ranking.items[count[static_cast<size_t>(dist[i])]++] = RankedItem{i, dist[i]};
  }
  if (top_k && *top_k < ranking.items.size()) ranking.items.resize(*top_k);
  return ranking;
}

std::vector<size_t> LookupWithinRadius(std::span<const uint64_t> query, const PackedCodes& db,
                                       int radius) {
  if (radius < 0 || static_cast<size_t>(radius) > db.bits()) {
    throw DataError("radius " + std::to_string(radius) + " outside [0, " +
                    std::to_string(db.bits()) + "]");
  }
  std::vector<size_t> ids;
  for (size_t i = 0; i < db.rows(); ++i) {
    if (HammingDistance(query, db.row(i), db.bits()) <= radius) ids.push_back(i);
  }
  return ids;
}

void SaveCodes(const std::filesystem::path& path, const PackedCodes& codes) {
  std::ofstream out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  binary_io::WriteMagic(out, kCodesMagic);
  binary_io::WriteUnsigned<uint32_t>(out, kCodesVersion);
  binary_io::WriteUnsigned<uint64_t>(out, codes.rows());
  binary_io::WriteUnsigned<uint64_t>(out, codes.bits());
  for (const uint64_t w : codes.words()) binary_io::WriteUnsigned<uint64_t>(out, w);
  if (!out) throw DataError("write failed: " + path.string());
}

PackedCodes LoadCodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::in | std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  binary_io::ExpectMagic(in, kCodesMagic);
  binary_io::ExpectVersion(in, kCodesVersion);
  const auto rows = binary_io::ReadUnsigned<uint64_t>(in, "n");
  const auto bits = binary_io::ReadUnsigned<uint64_t>(in, "c");
  if (rows == 0) throw DataError("empty dataset");
  if (bits == 0 || bits > (1u << 20)) throw DataError("implausible code length in codes file");
  std::vector<uint64_t> words(rows * WordsForBits(bits));
  for (auto& w : words) w = binary_io::ReadUnsigned<uint64_t>(in, "packed rows");
  return PackedCodes(rows, bits, std::move(words));
}

}  // namespace ddsh
