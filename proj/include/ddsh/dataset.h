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

#ifndef DDSH_DATASET_H_
#define DDSH_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ddsh {

// Dense n x d feature matrix, row-major, finite f32 entries.
class FeatureMatrix {
 public:
  FeatureMatrix(size_t rows, size_t cols, std::vector<float> values);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  float at(size_t i, size_t j) const { return values_[i * cols_ + j]; }
  std::span<const float> row(size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  const std::vector<float>& values() const { return values_; }

  // Rows in the given order; indices must be in range.
  FeatureMatrix Select(std::span<const size_t> indices) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  size_t rows_;
  size_t cols_;
  std::vector<float> values_;
};

// Per-point label sets. Each set is stored sorted and deduplicated.
class LabelSet {
 public:
  explicit LabelSet(std::vector<std::vector<uint32_t>> labels);

  size_t size() const { return labels_.size(); }
  std::span<const uint32_t> labels(size_t i) const { return labels_[i]; }

  // True iff the label sets of points i and j intersect.
  bool SharesLabel(size_t i, size_t j) const;
  static bool Intersect(std::span<const uint32_t> a, std::span<const uint32_t> b);
  // |labels(i) ∪ labels(j)|
  size_t UnionSize(size_t i, size_t j) const;

  LabelSet Select(std::span<const size_t> indices) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::vector<uint32_t>> labels_;
};

struct Dataset {
  FeatureMatrix features;
  LabelSet labels;
  // Role partitions by point index. Empty lists mean "unassigned".
  std::vector<size_t> query;
  std::vector<size_t> retrieval;
  std::vector<size_t> training;

  size_t size() const { return features.rows(); }
};

// Checks features/labels agree in length and that query and retrieval are
// disjoint. Throws DataError.
void ValidateDataset(const Dataset& dataset);

// Randomly moves `num_query` points into the query partition; the remaining
// points form both the retrieval and the training partitions.
void AssignQuerySplit(Dataset& dataset, size_t num_query, uint64_t seed);

enum class FeatureFormat { kCsv, kBinary };

// ".bin" and ".ddfv" select the binary format, anything else CSV.
FeatureFormat FeatureFormatForPath(const std::filesystem::path& path);

FeatureMatrix LoadFeatures(const std::filesystem::path& path, FeatureFormat format);
FeatureMatrix LoadFeatures(const std::filesystem::path& path);
void SaveFeatures(const std::filesystem::path& path, const FeatureMatrix& features,
                  FeatureFormat format);
void SaveFeatures(const std::filesystem::path& path, const FeatureMatrix& features);

LabelSet LoadLabels(const std::filesystem::path& path);
void SaveLabels(const std::filesystem::path& path, const LabelSet& labels);

// Isotropic Gaussian blobs. Class centers lie on a sphere of radius
// 10 * spread; points are center + spread * N(0, I). Points are ordered by
// class, labels are the class ids.
Dataset GenerateBlobs(size_t num_classes, size_t per_class, size_t dim, double spread,
                      uint64_t seed);

}  // namespace ddsh

#endif  // DDSH_DATASET_H_
