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

#include "ddsh/metrics.h"

#include <algorithm>
#include <string>

#include "ddsh/errors.h"

namespace ddsh {

RelevanceJudge::RelevanceJudge(LabelSet query_labels, LabelSet db_labels)
    : query_labels_(std::move(query_labels)), db_labels_(std::move(db_labels)) {
  total_relevant_.resize(query_labels_.size(), 0);
  for (size_t q = 0; q < query_labels_.size(); ++q) {
    for (size_t d = 0; d < db_labels_.size(); ++d) {
      if (Relevant(q, d)) ++total_relevant_[q];
    }
  }
}

bool RelevanceJudge::Relevant(size_t query, size_t item) const {
  return LabelSet::Intersect(query_labels_.labels(query), db_labels_.labels(item));
}

std::vector<bool> RelevanceJudge::Judge(size_t query, const Ranking& ranking) const {
  std::vector<bool> rel(ranking.items.size());
  for (size_t k = 0; k < rel.size(); ++k) rel[k] = Relevant(query, ranking.items[k].id);
  return rel;
}

double AveragePrecision(const std::vector<bool>& ranked_relevance, size_t total_relevant,
                        std::optional<size_t> truncate_at) {
  const size_t cutoff = truncate_at ? std::min(*truncate_at, ranked_relevance.size())
                                    : ranked_relevance.size();
  const size_t denom = truncate_at ? std::min(total_relevant, cutoff) : total_relevant;
  if (denom == 0) return 0.0;
  double sum = 0.0;
  size_t hits = 0;
  for (size_t k = 0; k < cutoff; ++k) {
    if (!ranked_relevance[k]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(denom);
}

double MeanAveragePrecision(std::span<const Ranking> rankings, const RelevanceJudge& judge,
                            std::optional<size_t> truncate_at) {
  if (rankings.empty()) throw DataError("MAP needs at least one query");
  double sum = 0.0;
  for (size_t q = 0; q < rankings.size(); ++q) {
    sum += AveragePrecision(judge.Judge(q, rankings[q]), judge.TotalRelevant(q), truncate_at);
  }
  return sum / static_cast<double>(rankings.size());
}

std::vector<std::pair<size_t, double>> TopKPrecision(const Ranking& ranking,
                                                     const RelevanceJudge& judge, size_t query,
                                                     std::span<const size_t> ks) {
  const auto rel = judge.Judge(query, ranking);
  std::vector<size_t> prefix(rel.size() + 1, 0);
  for (size_t k = 0; k < rel.size(); ++k) prefix[k + 1] = prefix[k] + (rel[k] ? 1 : 0);
  std::vector<std::pair<size_t, double>> out;
  for (const size_t k : ks) {
    if (k < 1 || k > rel.size()) {
      throw DataError("top-k cutoff " + std::to_string(k) + " outside [1, " +
                      std::to_string(rel.size()) + "]");
    }
    out.emplace_back(k, static_cast<double>(prefix[k]) / static_cast<double>(k));
  }
  return out;
}

std::vector<PrPoint> PrecisionRecallCurve(const Ranking& ranking, const RelevanceJudge& judge,
                                          size_t query) {
  const size_t total = judge.TotalRelevant(query);
  if (total == 0) {
    throw DataError("query " + std::to_string(query) + " has no relevant items in the database");
  }
  const auto rel = judge.Judge(query, ranking);
  std::vector<PrPoint> curve;
  curve.reserve(rel.size());
  size_t hits = 0;
  for (size_t k = 0; k < rel.size(); ++k) {
    if (rel[k]) ++hits;
    curve.push_back({static_cast<double>(hits) / static_cast<double>(total),
                     static_cast<double>(hits) / static_cast<double>(k + 1)});
  }
  return curve;
}

double SuccessRate(const PackedCodes& queries, const PackedCodes& db, const RelevanceJudge& judge,
                   int radius) {
  if (queries.rows() == 0) throw DataError("success rate needs at least one query");
  if (queries.bits() != db.bits()) throw DataError("query and database code lengths differ");
  size_t successes = 0;
  for (size_t q = 0; q < queries.rows(); ++q) {
    const auto ids = LookupWithinRadius(queries.row(q), db, radius);
    if (std::any_of(ids.begin(), ids.end(), [&](size_t d) { return judge.Relevant(q, d); })) {
      ++successes;
    }
  }
  return static_cast<double>(successes) / static_cast<double>(queries.rows());
}

RetrievalReport Evaluate(const PackedCodes& queries, const PackedCodes& db,
                         const RelevanceJudge& judge, const EvalOptions& options) {
  if (queries.bits() != db.bits()) {
    throw DataError("code length mismatch: queries have " + std::to_string(queries.bits()) +
                    " bits, database " + std::to_string(db.bits()));
  }
  if (queries.rows() != judge.num_queries() || db.rows() != judge.db_size()) {
    throw DataError("codes and labels disagree on the number of points");
  }
  if (queries.rows() == 0) throw DataError("evaluation needs at least one query");

  RetrievalReport report;
  report.map_at = options.map_at;

  std::vector<size_t> ks;
  for (const size_t k : options.ks) {
    if (k >= 1 && k <= db.rows()) ks.push_back(k);
  }
  std::vector<double> topk_sum(ks.size(), 0.0);
  std::vector<PrPoint> pr_sum(db.rows(), PrPoint{0.0, 0.0});
  size_t pr_queries = 0;

  double ap_sum = 0.0;
  for (size_t q = 0; q < queries.rows(); ++q) {
    const auto ranking = Rank(queries.row(q), db);
    const double ap =
        AveragePrecision(judge.Judge(q, ranking), judge.TotalRelevant(q), options.map_at);
    report.per_query_ap.push_back(ap);
    ap_sum += ap;
    const auto topk = TopKPrecision(ranking, judge, q, ks);
    for (size_t i = 0; i < ks.size(); ++i) topk_sum[i] += topk[i].second;
    if (judge.TotalRelevant(q) > 0) {
      const auto curve = PrecisionRecallCurve(ranking, judge, q);
      for (size_t k = 0; k < curve.size(); ++k) {
        pr_sum[k].recall += curve[k].recall;
        pr_sum[k].precision += curve[k].precision;
      }
      ++pr_queries;
    }
  }
  const auto num_q = static_cast<double>(queries.rows());
  report.map = ap_sum / num_q;
  for (size_t i = 0; i < ks.size(); ++i) report.topk.emplace_back(ks[i], topk_sum[i] / num_q);
  if (pr_queries > 0) {
    for (auto& p : pr_sum) {
      report.pr_curve.push_back({p.recall / static_cast<double>(pr_queries),
                                 p.precision / static_cast<double>(pr_queries)});
    }
  }
  for (const int r : options.radii) {
    if (r < 0 || static_cast<size_t>(r) > db.bits()) continue;
    report.success_rate[r] = SuccessRate(queries, db, judge, r);
  }
  return report;
}

}  // namespace ddsh
