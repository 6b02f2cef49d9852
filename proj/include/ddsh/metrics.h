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

#ifndef DDSH_METRICS_H_
#define DDSH_METRICS_H_

// Retrieval evaluation: AP / MAP (optionally truncated), top-k precision,
// precision-recall by ranking cutoff, and hash lookup success rate.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ddsh/dataset.h"
#include "ddsh/retrieval.h"

namespace ddsh {

// A database item is relevant to a query iff their label sets intersect.
class RelevanceJudge {
 public:
  RelevanceJudge(LabelSet query_labels, LabelSet db_labels);

  size_t num_queries() const { return query_labels_.size(); }
  size_t db_size() const { return db_labels_.size(); }
  bool Relevant(size_t query, size_t item) const;
  size_t TotalRelevant(size_t query) const { return total_relevant_.at(query); }

  // Relevance flags along a ranking.
  std::vector<bool> Judge(size_t query, const Ranking& ranking) const;

 private:
  LabelSet query_labels_;
  LabelSet db_labels_;
  std::vector<size_t> total_relevant_;
};

// (1/R) sum_{k <= N'} P(k) rel(k), N' = min(N, K). R = total_relevant, or
// min(total_relevant, N') when truncated. Returns 0 when R = 0.
double AveragePrecision(const std::vector<bool>& ranked_relevance, size_t total_relevant,
                        std::optional<size_t> truncate_at = std::nullopt);

// `rankings[q]` is the ranking for query q of the judge.
double MeanAveragePrecision(std::span<const Ranking> rankings, const RelevanceJudge& judge,
                            std::optional<size_t> truncate_at = std::nullopt);

// precision@k = relevant in top k / k. Each k must be in [1, ranking length].
std::vector<std::pair<size_t, double>> TopKPrecision(const Ranking& ranking,
                                                     const RelevanceJudge& judge, size_t query,
                                                     std::span<const size_t> ks);

struct PrPoint {
  double recall;
  double precision;
};

// One point per cutoff k = 1..N, no interpolation. Requires at least one
// relevant database item.
std::vector<PrPoint> PrecisionRecallCurve(const Ranking& ranking, const RelevanceJudge& judge,
                                          size_t query);

// Fraction of queries with at least one relevant item within `radius`.
double SuccessRate(const PackedCodes& queries, const PackedCodes& db, const RelevanceJudge& judge,
                   int radius);

struct EvalOptions {
  std::vector<int> radii = {0, 1, 2};
  std::vector<size_t> ks = {1, 10, 50, 100};
  std::optional<size_t> map_at;
};

struct RetrievalReport {
  double map = 0.0;                   // truncated at map_at when set
  std::optional<size_t> map_at;
  std::vector<double> per_query_ap;
  std::vector<std::pair<size_t, double>> topk;  // averaged over queries
  std::vector<PrPoint> pr_curve;                // averaged over queries with R > 0
  std::map<int, double> success_rate;
};

// ks larger than the database are dropped; radii above c are clamped out.
RetrievalReport Evaluate(const PackedCodes& queries, const PackedCodes& db,
                         const RelevanceJudge& judge, const EvalOptions& options);

}  // namespace ddsh

#endif  // DDSH_METRICS_H_
