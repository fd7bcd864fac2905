// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GT360_EVAL_HPP
#define GT360_EVAL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gt360/data.hpp"
#include "gt360/types.hpp"

namespace gt360::eval {

// Positive-cell definition for the heatmap ranking metric.
enum class AucPositives {
  kGaussianDisk,  // cells where the peak-1 Gaussian GT exceeds 0.5
  kSingleCell,
};

enum class PointExtract { kArgmax, kCentroid };

// ROC-AUC of predicted cell values against the target cell(s), midrank tie
// convention.
double heatmap_auc(const HeatmapGrid& pred, Point target,
                   AucPositives mode = AucPositives::kGaussianDisk,
                   double sigma_px = 3.0);

// Rank-based AUC over arbitrary scored binary items (midranks for ties).
// Requires at least one positive and one negative.
double ranked_auc(const std::vector<std::pair<double, bool>>& scored);

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // a zero-division was coerced to 0
};

// Binary precision/recall/F1 with EC as the positive class.
PrfResult ec_prf(const std::vector<bool>& preds, const std::vector<bool>& truths);

// Area under the precision-recall curve, step-wise (all-points)
// interpolation over descending unique score thresholds.
double average_precision(const std::vector<std::pair<double, bool>>& scored);

// Prediction/truth pairing for one head in one image.
struct EvalRecord {
  GazeVerdict pred;
  data::AnnotatedSample truth;
};

// Mean Euclidean distance between extracted prediction points and truth
// targets, normalized coordinates. All records must be truth-IFT with
// prediction heatmaps.
double mean_l2(const std::vector<EvalRecord>& records,
               PointExtract mode = PointExtract::kArgmax);

struct Metrics {
  std::optional<double> auc;        // mean heatmap AUC over IFT records
  std::optional<double> auc_single; // single-cell positive mode
  std::optional<double> l2;
  std::optional<double> ap_inout;
  std::optional<PrfResult> ec;
  size_t records = 0;
};

struct SuiteReport {
  Metrics overall;
  std::map<std::string, Metrics> per_source;
  std::string to_json() const;  // versioned report schema
};

SuiteReport evaluate_suite(const std::vector<EvalRecord>& records,
                           PointExtract mode = PointExtract::kArgmax,
                           double sigma_px = 3.0);

}  // namespace gt360::eval

#endif  // GT360_EVAL_HPP
