// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "gt360/eval.hpp"
#include "gt360/geometry.hpp"
#include "testutil.hpp"

using namespace gt360;
using eval::EvalRecord;

namespace {

// O(P*N) pairwise AUC oracle with the half-credit tie convention.
double pairwise_auc(const std::vector<std::pair<double, bool>>& scored) {
  double wins = 0.0;
  size_t pos = 0, neg = 0;
  for (const auto& [sp, lp] : scored) {
    if (!lp) continue;
    ++pos;
    for (const auto& [sn, ln] : scored) {
      if (ln) continue;
      if (sp > sn)
        wins += 1.0;
      else if (sp == sn)
        wins += 0.5;
    }
  }
  for (const auto& [s, l] : scored)
    if (!l) ++neg;
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Brute-force PR-curve integration: recompute precision/recall from scratch
// at every unique threshold.
double brute_force_ap(const std::vector<std::pair<double, bool>>& scored) {
  std::vector<double> thresholds;
  for (const auto& [s, l] : scored) thresholds.push_back(s);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  size_t total_pos = 0;
  for (const auto& [s, l] : scored)
    if (l) ++total_pos;

  double ap = 0.0, prev_recall = 0.0;
  for (const double th : thresholds) {
    size_t tp = 0, fp = 0;
    for (const auto& [s, l] : scored)
      if (s >= th) (l ? tp : fp)++;
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

EvalRecord make_ift_record(Point target, const HeatmapGrid& pred, double p_ift,
                           const std::string& source = "fx") {
  EvalRecord rec;
  rec.truth.image_ref = "img.png";
  rec.truth.head = {0.1, 0.1, 0.4, 0.4, 1.0};
  rec.truth.label = data::Label::kIFT;
  rec.truth.target = target;
  rec.truth.source = source;
  rec.pred.head = rec.truth.head;
  rec.pred.cls = GazeClass::kInFrame;
  rec.pred.p_ec = 0.1;
  rec.pred.p_ift = p_ift;
  rec.pred.heatmap = pred;
  rec.pred.target_point = argmax_point(pred);
  return rec;
}

}  // namespace

TEST_CASE("heatmap_auc: perfect prediction scores 1, uniform scores 0.5") {
  const Point target{0.5, 0.5};
  HeatmapGrid perfect;
  perfect.at(32, 32) = 1.0;
  CHECK(eval::heatmap_auc(perfect, target, eval::AucPositives::kSingleCell) ==
        doctest::Approx(1.0));

  HeatmapGrid uniform;
  for (auto& v : uniform.values()) v = 0.25;
  CHECK(eval::heatmap_auc(uniform, target) == doctest::Approx(0.5));
}

TEST_CASE("heatmap_auc matches the pairwise oracle") {
  Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    HeatmapGrid pred;
    for (auto& v : pred.values()) v = rng.uniform();
    const Point target{rng.uniform(), rng.uniform()};
    const double got = eval::heatmap_auc(pred, target);

    const int n = HeatmapGrid::kSize;
    const int col = std::min(n - 1, static_cast<int>(target.x * n));
    const int row = std::min(n - 1, static_cast<int>(target.y * n));
    const double limit = 2.0 * 9.0 * std::log(2.0);
    std::vector<std::pair<double, bool>> scored;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        scored.emplace_back(pred.at(r, c),
                            (r - row) * (r - row) + (c - col) * (c - col) < limit);
    CHECK(std::abs(got - pairwise_auc(scored)) < 1e-9);
  }
}

TEST_CASE("ranked_auc matches the pairwise oracle on small instances with ties") {
  Rng rng(72);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, bool>> scored;
    const int n = rng.uniform_int(4, 24);
    for (int i = 0; i < n; ++i)
      scored.emplace_back(rng.uniform_int(0, 5) / 5.0, rng.uniform() < 0.5);
    bool has_pos = false, has_neg = false;
    for (const auto& [s, l] : scored) (l ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;
    CHECK(std::abs(eval::ranked_auc(scored) - pairwise_auc(scored)) < 1e-9);
  }
}

TEST_CASE("heatmap_auc invariant under strictly monotone transforms") {
  Rng rng(73);
  HeatmapGrid pred;
  for (auto& v : pred.values()) v = rng.uniform();
  const Point target{0.3, 0.7};
  const double base = eval::heatmap_auc(pred, target);
  HeatmapGrid squashed;
  for (int i = 0; i < 64 * 64; ++i)
    squashed.values()[i] = 1.0 / (1.0 + std::exp(-4.0 * pred.values()[i]));
  CHECK(eval::heatmap_auc(squashed, target) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("average_precision closed cases") {
  CHECK(eval::average_precision({{0.9, true}, {0.8, true}, {0.2, false}}) ==
        doctest::Approx(1.0));
  // Perfectly inverted two-element case.
  CHECK(eval::average_precision({{0.4, true}, {0.6, false}}) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(eval::average_precision({{0.4, true}}), Error);
}

TEST_CASE("average_precision matches brute-force PR integration") {
  Rng rng(74);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, bool>> scored;
    for (int i = 0; i < 20; ++i)
      scored.emplace_back(rng.uniform_int(0, 9) / 9.0, rng.uniform() < 0.4);
    bool has_pos = false, has_neg = false;
    for (const auto& [s, l] : scored) (l ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;
    CHECK(std::abs(eval::average_precision(scored) - brute_force_ap(scored)) <
          1e-9);
  }
}

TEST_CASE("average_precision invariant under monotone score transforms") {
  Rng rng(75);
  std::vector<std::pair<double, bool>> scored;
  for (int i = 0; i < 30; ++i)
    scored.emplace_back(rng.uniform(), rng.uniform() < 0.5);
  const double base = eval::average_precision(scored);
  auto transformed = scored;
  for (auto& [s, l] : transformed) s = std::tanh(3.0 * s) + 2.0;
  CHECK(eval::average_precision(transformed) == doctest::Approx(base));
}

TEST_CASE("ec_prf closed forms") {
  CHECK(eval::ec_prf({true, false, true}, {true, false, true}).f1 ==
        doctest::Approx(1.0));

  const auto none = eval::ec_prf({false, false, false}, {true, false, true});
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.degenerate);

  // 8 TP, 2 FP, 1 FN.
  std::vector<bool> preds, truths;
  for (int i = 0; i < 8; ++i) { preds.push_back(true); truths.push_back(true); }
  for (int i = 0; i < 2; ++i) { preds.push_back(true); truths.push_back(false); }
  preds.push_back(false); truths.push_back(true);
  const auto r = eval::ec_prf(preds, truths);
  CHECK(r.precision == doctest::Approx(0.8));
  CHECK(r.recall == doctest::Approx(8.0 / 9.0));
  CHECK(r.f1 == doctest::Approx(2.0 * 0.8 * (8.0 / 9.0) / (0.8 + 8.0 / 9.0)));

  CHECK_THROWS_AS(eval::ec_prf({true}, {true, false}), Error);
  CHECK_THROWS_AS(eval::ec_prf({true}, {false}), Error);
}

TEST_CASE("mean_l2 closed forms and loop oracle") {
  // Exact hit: target at a cell center.
  const Point t{(20 + 0.5) / 64.0, (40 + 0.5) / 64.0};
  HeatmapGrid hm;
  hm.at(40, 20) = 1.0;
  CHECK(eval::mean_l2({make_ift_record(t, hm, 0.9)}) == doctest::Approx(0.0));

  // Diagonal corner-to-corner distance.
  HeatmapGrid corner;
  corner.at(0, 0) = 1.0;
  auto rec = make_ift_record({1.0, 1.0}, corner, 0.9);
  rec.pred.heatmap->at(0, 0) = 1.0;
  const double got = eval::mean_l2({rec});
  const double expect = std::hypot(1.0 - 0.5 / 64, 1.0 - 0.5 / 64);
  CHECK(got == doctest::Approx(expect));

  // Loop oracle on random records.
  Rng rng(76);
  std::vector<EvalRecord> records;
  double oracle = 0.0;
  for (int i = 0; i < 10; ++i) {
    HeatmapGrid pred;
    for (auto& v : pred.values()) v = rng.uniform();
    const Point target{rng.uniform(), rng.uniform()};
    records.push_back(make_ift_record(target, pred, 0.8));
    const Point p = argmax_point(pred);
    oracle += std::hypot(p.x - target.x, p.y - target.y);
  }
  oracle /= 10.0;
  CHECK(std::abs(eval::mean_l2(records) - oracle) < 1e-9);

  CHECK_THROWS_AS(eval::mean_l2({}), Error);
}

TEST_CASE("mean_l2 translation property") {
  // Shifting pred peak and truth by the same cell offset leaves L2 unchanged.
  HeatmapGrid a, b;
  a.at(10, 10) = 1.0;
  b.at(20, 20) = 1.0;
  const Point ta{(14 + 0.5) / 64, (12 + 0.5) / 64};
  const Point tb{(24 + 0.5) / 64, (22 + 0.5) / 64};
  const double da = eval::mean_l2({make_ift_record(ta, a, 0.9)});
  const double db = eval::mean_l2({make_ift_record(tb, b, 0.9)});
  CHECK(da == doctest::Approx(db));
}

TEST_CASE("evaluate_suite: perfect predictions and absence semantics") {
  Rng rng(77);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 6; ++i) {
    const int col = rng.uniform_int(5, 58), row = rng.uniform_int(5, 58);
    const Point t{(col + 0.5) / 64, (row + 0.5) / 64};
    records.push_back(
        make_ift_record(t, data::build_gt_heatmap(t), 0.99, i < 3 ? "a" : "b"));
  }
  for (int i = 0; i < 4; ++i) {
    EvalRecord rec;
    rec.truth.image_ref = "x.png";
    rec.truth.head = {0.1, 0.1, 0.5, 0.5, 1.0};
    rec.truth.label = data::Label::kOFT;
    rec.truth.source = "a";
    rec.pred.head = rec.truth.head;
    rec.pred.cls = GazeClass::kOutOfFrame;
    rec.pred.p_ec = 0.2;
    rec.pred.p_ift = 0.01;
    records.push_back(rec);
  }

  const auto report = eval::evaluate_suite(records);
  REQUIRE(report.overall.auc.has_value());
  CHECK(*report.overall.auc == doctest::Approx(1.0));
  REQUIRE(report.overall.l2.has_value());
  CHECK(*report.overall.l2 == doctest::Approx(0.0));
  REQUIRE(report.overall.ap_inout.has_value());
  CHECK(*report.overall.ap_inout == doctest::Approx(1.0));
  // No EC-positive truth anywhere: EC metrics absent, not zero.
  CHECK_FALSE(report.overall.ec.has_value());

  CHECK(report.per_source.size() == 2);
  CHECK(report.per_source.at("a").records == 7);
  CHECK(report.per_source.at("b").records == 3);
  CHECK_FALSE(report.per_source.at("b").ap_inout.has_value());  // IFT only

  const std::string json_text = report.to_json();
  CHECK(json_text.find("\"version\": 1") != std::string::npos);
  CHECK(json_text.find("\"ec\": null") != std::string::npos);
}

TEST_CASE("metric ranges: [0,1] everywhere, mean_l2 within [0, sqrt 2]") {
  Rng rng(78);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<eval::EvalRecord> records;
    std::vector<std::pair<double, bool>> scored;
    bool pos = false, neg = false;
    for (int i = 0; i < 8; ++i) {
      HeatmapGrid pred;
      for (auto& v : pred.values()) v = rng.uniform();
      const Point target{rng.uniform(), rng.uniform()};
      records.push_back(make_ift_record(target, pred, rng.uniform()));
      const bool label = rng.uniform() < 0.5;
      (label ? pos : neg) = true;
      scored.emplace_back(rng.uniform(), label);
      const double auc = eval::heatmap_auc(pred, target);
      CHECK(auc >= 0.0);
      CHECK(auc <= 1.0);
    }
    const double l2 = eval::mean_l2(records);
    CHECK(l2 >= 0.0);
    CHECK(l2 <= std::sqrt(2.0));
    if (pos && neg) {
      const double ap = eval::average_precision(scored);
      CHECK(ap >= 0.0);
      CHECK(ap <= 1.0);
    }
  }
}

TEST_CASE("evaluate_suite computes EC metrics when EC truth exists") {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 10; ++i) {
    EvalRecord rec;
    rec.truth.image_ref = "x.png";
    rec.truth.head = {0.1, 0.1, 0.5, 0.5, 1.0};
    rec.truth.label = i < 6 ? data::Label::kEC : data::Label::kOFT;
    rec.truth.source = "ec_set";
    rec.pred.head = rec.truth.head;
    const bool pred_ec = i < 5 || i == 7;  // 5 TP, 1 FN, 1 FP, 3 TN
    rec.pred.cls = pred_ec ? GazeClass::kEyeContact : GazeClass::kOutOfFrame;
    rec.pred.p_ec = pred_ec ? 0.9 : 0.2;
    if (!pred_ec) rec.pred.p_ift = 0.1;
    records.push_back(rec);
  }
  const auto report = eval::evaluate_suite(records);
  REQUIRE(report.overall.ec.has_value());
  CHECK(report.overall.ec->precision == doctest::Approx(5.0 / 6.0));
  CHECK(report.overall.ec->recall == doctest::Approx(5.0 / 6.0));
}
