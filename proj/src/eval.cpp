// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include "gt360/eval.hpp"

#include <algorithm>
#include <cmath>

#include "gt360/geometry.hpp"
#include "json.hpp"

namespace gt360::eval {

double ranked_auc(const std::vector<std::pair<double, bool>>& scored) {
  size_t pos = 0, neg = 0;
  for (const auto& [s, l] : scored) (l ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw Error("ranked_auc: need at least one positive and one negative");

  std::vector<std::pair<double, bool>> sorted = scored;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Sum of positive midranks (1-based, ascending scores).
  double rank_sum = 0.0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // (i+1 + j)/2
    for (size_t k = i; k < j; ++k)
      if (sorted[k].second) rank_sum += midrank;
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double heatmap_auc(const HeatmapGrid& pred, Point target, AucPositives mode,
                   double sigma_px) {
  if (target.x < 0.0 || target.x > 1.0 || target.y < 0.0 || target.y > 1.0)
    throw Error("heatmap_auc: target outside [0,1]^2");
  const int n = HeatmapGrid::kSize;
  const int col = std::clamp(static_cast<int>(target.x * n), 0, n - 1);
  const int row = std::clamp(static_cast<int>(target.y * n), 0, n - 1);

  // Positive set: GT Gaussian above 0.5 <=> squared distance < 2 sigma^2 ln 2.
  const double r2_limit = mode == AucPositives::kGaussianDisk
                              ? 2.0 * sigma_px * sigma_px * std::log(2.0)
                              : 0.25;  // single cell only
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(static_cast<size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double dr = r - row, dc = c - col;
      scored.emplace_back(pred.at(r, c), dr * dr + dc * dc < r2_limit);
    }
  return ranked_auc(scored);
}

PrfResult ec_prf(const std::vector<bool>& preds, const std::vector<bool>& truths) {
  if (preds.size() != truths.size())
    throw Error("ec_prf: length mismatch: " + std::to_string(preds.size()) +
                " vs " + std::to_string(truths.size()));
  size_t tp = 0, fp = 0, fn = 0, pos = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (truths[i]) ++pos;
    if (preds[i] && truths[i]) ++tp;
    if (preds[i] && !truths[i]) ++fp;
    if (!preds[i] && truths[i]) ++fn;
  }
  if (pos == 0) throw Error("ec_prf: no positive truth labels");
  PrfResult r;
  if (tp + fp == 0) {
    r.precision = 0.0;
    r.degenerate = true;
  } else {
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall == 0.0) {
    r.f1 = 0.0;
    r.degenerate = true;
  } else {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

double average_precision(const std::vector<std::pair<double, bool>>& scored) {
  size_t pos = 0, neg = 0;
  for (const auto& [s, l] : scored) (l ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw Error("average_precision: need at least one positive and one negative");

  std::vector<std::pair<double, bool>> sorted = scored;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // Step integration: at each unique descending threshold,
  // AP += (R - R_prev) * P.
  double ap = 0.0, prev_recall = 0.0;
  size_t tp = 0, predicted = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
    for (size_t k = i; k < j; ++k) {
      ++predicted;
      if (sorted[k].second) ++tp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(predicted);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double mean_l2(const std::vector<EvalRecord>& records, PointExtract mode) {
  if (records.empty()) throw Error("mean_l2: empty record list");
  double total = 0.0;
  for (const auto& rec : records) {
    if (rec.truth.label != data::Label::kIFT || !rec.truth.target)
      throw Error("mean_l2: record is not truth-IFT with a target");
    if (!rec.pred.heatmap)
      throw Error("mean_l2: prediction lacks a heatmap");
    const Point p = mode == PointExtract::kArgmax
                        ? argmax_point(*rec.pred.heatmap)
                        : centroid_point(*rec.pred.heatmap);
    const double dx = p.x - rec.truth.target->x;
    const double dy = p.y - rec.truth.target->y;
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total / static_cast<double>(records.size());
}

namespace {

Metrics compute_metrics(const std::vector<EvalRecord>& records,
                        PointExtract mode, double sigma_px) {
  Metrics m;
  m.records = records.size();

  std::vector<EvalRecord> ift;
  std::vector<std::pair<double, bool>> inout_scores;
  std::vector<bool> ec_preds, ec_truths;
  size_t ec_pos = 0;
  for (const auto& rec : records) {
    if (rec.truth.label == data::Label::kUnknown) continue;
    if (rec.truth.label == data::Label::kIFT && rec.truth.target &&
        rec.pred.heatmap)
      ift.push_back(rec);
    if (rec.truth.label != data::Label::kEC && rec.pred.p_ift)
      inout_scores.emplace_back(*rec.pred.p_ift,
                                rec.truth.label == data::Label::kIFT);
    ec_preds.push_back(rec.pred.cls == GazeClass::kEyeContact);
    ec_truths.push_back(rec.truth.label == data::Label::kEC);
    if (rec.truth.label == data::Label::kEC) ++ec_pos;
  }

  if (!ift.empty()) {
    double auc = 0.0, auc_single = 0.0;
    for (const auto& rec : ift) {
      auc += heatmap_auc(*rec.pred.heatmap, *rec.truth.target,
                         AucPositives::kGaussianDisk, sigma_px);
      auc_single += heatmap_auc(*rec.pred.heatmap, *rec.truth.target,
                                AucPositives::kSingleCell, sigma_px);
    }
    m.auc = auc / static_cast<double>(ift.size());
    m.auc_single = auc_single / static_cast<double>(ift.size());
    m.l2 = mean_l2(ift, mode);
  }

  bool has_pos = false, has_neg = false;
  for (const auto& [s, l] : inout_scores) (l ? has_pos : has_neg) = true;
  if (has_pos && has_neg) m.ap_inout = average_precision(inout_scores);

  // EC metrics are meaningful only when the truth labeling contains EC
  // positives; otherwise they are reported as absent rather than zero.
  if (ec_pos > 0) m.ec = ec_prf(ec_preds, ec_truths);
  return m;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["records"] = m.records;
  j["auc"] = m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr);
  j["auc_single_cell"] =
      m.auc_single ? nlohmann::json(*m.auc_single) : nlohmann::json(nullptr);
  j["mean_l2"] = m.l2 ? nlohmann::json(*m.l2) : nlohmann::json(nullptr);
  j["ap_inout"] = m.ap_inout ? nlohmann::json(*m.ap_inout) : nlohmann::json(nullptr);
  if (m.ec) {
    j["ec"] = {{"precision", m.ec->precision},
               {"recall", m.ec->recall},
               {"f1", m.ec->f1}};
  } else {
    j["ec"] = nullptr;
  }
  return j;
}

}  // namespace

SuiteReport evaluate_suite(const std::vector<EvalRecord>& records,
                           PointExtract mode, double sigma_px) {
  if (records.empty()) throw Error("evaluate_suite: empty record list");
  SuiteReport report;
  report.overall = compute_metrics(records, mode, sigma_px);

  std::map<std::string, std::vector<EvalRecord>> by_source;
  for (const auto& rec : records) by_source[rec.truth.source].push_back(rec);
  for (const auto& [source, recs] : by_source)
    report.per_source[source] = compute_metrics(recs, mode, sigma_px);
  return report;
}

std::string SuiteReport::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["overall"] = metrics_to_json(overall);
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [source, m] : per_source)
    sources[source.empty() ? "(unlabeled)" : source] = metrics_to_json(m);
  j["per_source"] = sources;
  return j.dump(2);
}

}  // namespace gt360::eval
