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

#include "ddsh/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <spdlog/spdlog.h>

#include "ddsh/binary_io.h"
#include "ddsh/errors.h"

namespace ddsh {
namespace {

constexpr std::string_view kFeatureMagic = "DDFV";
constexpr uint32_t kFeatureVersion = 1;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(Trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string RowError(size_t row, const std::string& msg) {
  return "row " + std::to_string(row) + ": " + msg;
}

std::ifstream OpenForRead(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

FeatureMatrix LoadCsvFeatures(const std::filesystem::path& path) {
  auto in = OpenForRead(path, std::ios::in);
  std::vector<float> values;
  size_t cols = 0;
  size_t rows = 0;
  size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view text = Trim(line);
    ++line_no;
    if (text.empty()) continue;
    if (line_no == 1 && text.starts_with("d=")) {
      const auto digits = text.substr(2);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cols);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || cols == 0) {
        throw DataError("malformed header \"" + std::string(text) + "\"");
      }
      continue;
    }
    const auto fields = Split(text, ',');
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols) {
      throw DataError(RowError(rows, "dimension mismatch: expected " + std::to_string(cols) +
                                         " values, got " + std::to_string(fields.size())));
    }
    for (const auto field : fields) {
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(RowError(rows, "cannot parse \"" + std::string(field) + "\""));
      }
      if (!std::isfinite(v)) throw DataError(RowError(rows, "non-finite value"));
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("empty dataset");
  return FeatureMatrix(rows, cols, std::move(values));
}

FeatureMatrix LoadBinaryFeatures(const std::filesystem::path& path) {
  auto in = OpenForRead(path, std::ios::in | std::ios::binary);
  binary_io::ExpectMagic(in, kFeatureMagic);
  binary_io::ExpectVersion(in, kFeatureVersion);
  const auto rows = binary_io::ReadUnsigned<uint64_t>(in, "n");
  const auto cols = binary_io::ReadUnsigned<uint64_t>(in, "d");
  if (rows == 0) throw DataError("empty dataset");
  if (cols == 0) throw DataError("malformed header: d = 0");
  std::vector<float> values;
  values.reserve(rows * cols);
  for (uint64_t i = 0; i < rows; ++i) {
    for (uint64_t j = 0; j < cols; ++j) {
      const float v = binary_io::ReadF32(in, "feature values");
      if (!std::isfinite(v)) throw DataError(RowError(i, "non-finite value"));
      values.push_back(v);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("dimension mismatch: trailing bytes after " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " values");
  }
  return FeatureMatrix(rows, cols, std::move(values));
}

std::string FormatFloat(float v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

FeatureMatrix::FeatureMatrix(size_t rows, size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0) throw DataError("empty dataset");
  if (cols_ == 0) throw DataError("feature dimension must be >= 1");
  if (values_.size() != rows_ * cols_) {
    throw DataError("dimension mismatch: " + std::to_string(values_.size()) +
                    " values for a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                    " matrix");
  }
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw DataError(RowError(i / cols_, "non-finite value"));
  }
}

FeatureMatrix FeatureMatrix::Select(std::span<const size_t> indices) const {
  std::vector<float> out;
  out.reserve(indices.size() * cols_);
  for (const size_t i : indices) {
    if (i >= rows_) throw DataError("row index " + std::to_string(i) + " out of range");
    const auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return FeatureMatrix(indices.size(), cols_, std::move(out));
}

LabelSet::LabelSet(std::vector<std::vector<uint32_t>> labels) : labels_(std::move(labels)) {
  for (size_t i = 0; i < labels_.size(); ++i) {
    auto& set = labels_[i];
    if (set.empty()) throw DataError(RowError(i, "point has no label"));
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
}

bool LabelSet::Intersect(std::span<const uint32_t> a, std::span<const uint32_t> b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) return true;
    if (*ia < *ib) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return false;
}

bool LabelSet::SharesLabel(size_t i, size_t j) const {
  return Intersect(labels_.at(i), labels_.at(j));
}

size_t LabelSet::UnionSize(size_t i, size_t j) const {
  const auto& a = labels_.at(i);
  const auto& b = labels_.at(j);
  size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) {
      ++common;
      ++ia;
      ++ib;
    } else if (*ia < *ib) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return a.size() + b.size() - common;
}

LabelSet LabelSet::Select(std::span<const size_t> indices) const {
  std::vector<std::vector<uint32_t>> out;
  out.reserve(indices.size());
  for (const size_t i : indices) {
    if (i >= labels_.size()) throw DataError("label index " + std::to_string(i) + " out of range");
    out.push_back(labels_[i]);
  }
  return LabelSet(std::move(out));
}

void ValidateDataset(const Dataset& dataset) {
  if (dataset.features.rows() != dataset.labels.size()) {
    throw DataError("dimension mismatch: " + std::to_string(dataset.features.rows()) +
                    " feature rows vs " + std::to_string(dataset.labels.size()) + " label rows");
  }
  const size_t n = dataset.size();
  std::vector<char> in_query(n, 0);
  for (const size_t q : dataset.query) {
    if (q >= n) throw DataError("query index " + std::to_string(q) + " out of range");
    in_query[q] = 1;
  }
  for (const size_t r : dataset.retrieval) {
    if (r >= n) throw DataError("retrieval index " + std::to_string(r) + " out of range");
    if (in_query[r]) {
      throw DataError("point " + std::to_string(r) + " is in both query and retrieval sets");
    }
  }
  for (const size_t t : dataset.training) {
    if (t >= n) throw DataError("training index " + std::to_string(t) + " out of range");
  }
}

void AssignQuerySplit(Dataset& dataset, size_t num_query, uint64_t seed) {
  const size_t n = dataset.size();
  if (num_query == 0 || num_query >= n) {
    throw ConfigError("query count must be in [1, n)");
  }
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  dataset.query.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(num_query));
  dataset.retrieval.assign(perm.begin() + static_cast<std::ptrdiff_t>(num_query), perm.end());
  std::sort(dataset.query.begin(), dataset.query.end());
  std::sort(dataset.retrieval.begin(), dataset.retrieval.end());
  dataset.training = dataset.retrieval;
}

FeatureFormat FeatureFormatForPath(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".ddfv") ? FeatureFormat::kBinary : FeatureFormat::kCsv;
}

FeatureMatrix LoadFeatures(const std::filesystem::path& path, FeatureFormat format) {
  return format == FeatureFormat::kBinary ? LoadBinaryFeatures(path) : LoadCsvFeatures(path);
}

FeatureMatrix LoadFeatures(const std::filesystem::path& path) {
  return LoadFeatures(path, FeatureFormatForPath(path));
}

void SaveFeatures(const std::filesystem::path& path, const FeatureMatrix& features,
                  FeatureFormat format) {
  if (format == FeatureFormat::kBinary) {
    auto out = OpenForWrite(path, std::ios::out | std::ios::binary | std::ios::trunc);
    binary_io::WriteMagic(out, kFeatureMagic);
    binary_io::WriteUnsigned<uint32_t>(out, kFeatureVersion);
    binary_io::WriteUnsigned<uint64_t>(out, features.rows());
    binary_io::WriteUnsigned<uint64_t>(out, features.cols());
    for (const float v : features.values()) binary_io::WriteF32(out, v);
    if (!out) throw DataError("write failed: " + path.string());
    return;
  }
  auto out = OpenForWrite(path, std::ios::out | std::ios::trunc);
  out << "d=" << features.cols() << '\n';
  for (size_t i = 0; i < features.rows(); ++i) {
    const auto r = features.row(i);
    for (size_t j = 0; j < r.size(); ++j) {
      if (j > 0) out << ',';
      out << FormatFloat(r[j]);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void SaveFeatures(const std::filesystem::path& path, const FeatureMatrix& features) {
  SaveFeatures(path, features, FeatureFormatForPath(path));
}

LabelSet LoadLabels(const std::filesystem::path& path) {
  auto in = OpenForRead(path, std::ios::in);
  std::vector<std::vector<uint32_t>> labels;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view text = Trim(line);
    if (text.empty()) continue;
    std::vector<uint32_t> set;
    for (const auto field : Split(text, ';')) {
      uint32_t id = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), id);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(RowError(labels.size(), "bad label id \"" + std::string(field) + "\""));
      }
      set.push_back(id);
    }
    labels.push_back(std::move(set));
  }
  if (labels.empty()) throw DataError("empty dataset");
  LabelSet result(std::move(labels));

  std::set<uint32_t> seen;
  for (size_t i = 0; i < result.size(); ++i) {
    for (const auto id : result.labels(i)) seen.insert(id);
  }
  if (!seen.empty() && *seen.rbegin() + 1 != seen.size()) {
    spdlog::warn("{}: label ids are not dense ({} distinct ids, max {})", path.string(),
                 seen.size(), *seen.rbegin());
  }
  return result;
}

void SaveLabels(const std::filesystem::path& path, const LabelSet& labels) {
  auto out = OpenForWrite(path, std::ios::out | std::ios::trunc);
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto set = labels.labels(i);
    for (size_t k = 0; k < set.size(); ++k) {
      if (k > 0) out << ';';
      out << set[k];
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Dataset GenerateBlobs(size_t num_classes, size_t per_class, size_t dim, double spread,
                      uint64_t seed) {
  if (num_classes < 2) throw ConfigError("generate_blobs: need at least 2 classes");
  if (per_class < 1) throw ConfigError("generate_blobs: per_class must be >= 1");
  if (dim < 1) throw ConfigError("generate_blobs: dim must be >= 1");
  if (!(spread > 0.0)) throw ConfigError("generate_blobs: spread must be > 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> centers(num_classes * dim);
  for (size_t k = 0; k < num_classes; ++k) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (size_t j = 0; j < dim; ++j) {
        const double g = normal(rng);
        centers[k * dim + j] = g;
        norm2 += g * g;
      }
    } while (norm2 == 0.0);
    const double scale = 10.0 * spread / std::sqrt(norm2);
    for (size_t j = 0; j < dim; ++j) centers[k * dim + j] *= scale;
  }

  const size_t n = num_classes * per_class;
  std::vector<float> values;
  values.reserve(n * dim);
  std::vector<std::vector<uint32_t>> labels;
  labels.reserve(n);
  for (size_t k = 0; k < num_classes; ++k) {
    for (size_t p = 0; p < per_class; ++p) {
      for (size_t j = 0; j < dim; ++j) {
        values.push_back(static_cast<float>(centers[k * dim + j] + spread * normal(rng)));
      }
      labels.push_back({static_cast<uint32_t>(k)});
    }
  }
  Dataset out{FeatureMatrix(n, dim, std::move(values)), LabelSet(std::move(labels)), {}, {}, {}};
  out.training.resize(n);
  std::iota(out.training.begin(), out.training.end(), size_t{0});
  return out;
}

}  // namespace ddsh
