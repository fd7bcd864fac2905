// Copyright 2026 The gt360 Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "gt360/data.hpp"
#include "gt360/geometry.hpp"
#include "testutil.hpp"

using namespace gt360;
using data::Gaze3dRecord;
using data::Label;

namespace {

// Brute-force closest approach of the line fc + t*(gt-fc)/|gt-fc| to the
// origin, by grid scan. Independent of the analytic projection.
double brute_force_dist(const Gaze3dRecord& rec, double t_lo = -1e4,
                        double t_hi = 1e4, double step = 0.1) {
  double v[3] = {rec.gt[0] - rec.fc[0], rec.gt[1] - rec.fc[1],
                 rec.gt[2] - rec.fc[2]};
  const double vn = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double d[3] = {v[0] / vn, v[1] / vn, v[2] / vn};
  double best = 1e300;
  for (double t = t_lo; t <= t_hi; t += step) {
    const double p[3] = {rec.fc[0] + t * d[0], rec.fc[1] + t * d[1],
                         rec.fc[2] + t * d[2]};
    best = std::min(best, std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  }
  return best;
}

Gaze3dRecord random_record(Rng& rng) {
  Gaze3dRecord rec;
  for (int i = 0; i < 3; ++i) {
    rec.fc[i] = rng.uniform(-500.0, 500.0);
    rec.gt[i] = rng.uniform(-500.0, 500.0);
  }
  rec.fc[2] += 800.0;  // subject in front of the camera
  return rec;
}

}  // namespace

TEST_CASE("ec_distance collinear rays pass through the origin") {
  CHECK(data::ec_distance({{0, 0, 1000}, {0, 0, 0}}) == doctest::Approx(0.0));
  CHECK(data::ec_distance({{0, 0, 1000}, {0, 0, 2000}}) == doctest::Approx(0.0));
  CHECK(data::ec_distance({{100, 0, 1000}, {100, 0, 0}}) == doctest::Approx(100.0));
}

TEST_CASE("ec_distance matches the brute-force scan") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Gaze3dRecord rec = random_record(rng);
    const double analytic = data::ec_distance(rec);
    const double brute = brute_force_dist(rec, -3000, 3000, 0.05);
    CHECK(analytic == doctest::Approx(brute).epsilon(1e-3));
  }
}

TEST_CASE("ec_distance homogeneity of degree 1") {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const Gaze3dRecord rec = random_record(rng);
    const double s = rng.uniform(0.1, 5.0);
    Gaze3dRecord scaled;
    for (int i = 0; i < 3; ++i) {
      scaled.fc[i] = s * rec.fc[i];
      scaled.gt[i] = s * rec.gt[i];
    }
    CHECK(data::ec_distance(scaled) ==
          doctest::Approx(s * data::ec_distance(rec)).epsilon(1e-9));
  }
}

TEST_CASE("ec_distance rejects zero-length gaze vectors") {
  CHECK_THROWS_AS(data::ec_distance({{1, 2, 3}, {1, 2, 3}}), DataError);
}

TEST_CASE("the projection-residual form is identically zero") {
  // Taken literally, ||v - (v.d)d|| removes v's entire projection onto its
  // own direction; the point-line distance above is the usable quantity.
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Gaze3dRecord rec = random_record(rng);
    CHECK(data::ec_distance_literal(rec) < 1e-9);
  }
}

TEST_CASE("label_ec_mpii strict 30mm boundary") {
  // Ray parallel to z through (d, 0, 1000) toward the camera plane: the
  // closest approach to the origin is exactly d.
  auto rec_at = [](double d) {
    return Gaze3dRecord{{d, 0, 1000}, {d, 0, 0}};
  };
  CHECK(data::label_ec_mpii(rec_at(0.0)) == Label::kEC);
  CHECK(data::label_ec_mpii(rec_at(29.9)) == Label::kEC);
  CHECK(data::label_ec_mpii(rec_at(30.0)) == Label::kOFT);  // strict <
  CHECK(data::label_ec_mpii(rec_at(30.1)) == Label::kOFT);
}

TEST_CASE("label_ec_mpii gates on gaze direction") {
  // Same line, but looking away from the camera.
  const Gaze3dRecord away{{0, 0, 1000}, {0, 0, 2000}};
  CHECK(data::label_ec_mpii(away) == Label::kOFT);
  const Gaze3dRecord toward{{0, 0, 1000}, {0, 0, 500}};
  CHECK(data::label_ec_mpii(toward) == Label::kEC);
}

TEST_CASE("label_ec_mpii threshold monotonicity") {
  Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const Gaze3dRecord rec = random_record(rng);
    const double t = rng.uniform(1.0, 200.0);
    if (data::label_ec_mpii(rec, t) == Label::kEC) {
      CHECK(data::label_ec_mpii(rec, t * 2) == Label::kEC);
      CHECK(data::label_ec_mpii(rec, t + 1) == Label::kEC);
    }
  }
}

TEST_CASE("label_ec_columbia exact zero-angle rule") {
  CHECK(data::label_ec_columbia(0, 0) == Label::kEC);
  CHECK(data::label_ec_columbia(0, 5) == Label::kOFT);
  CHECK(data::label_ec_columbia(-10, 0) == Label::kOFT);
  CHECK_THROWS_AS(data::label_ec_columbia(NAN, 0), DataError);
}

TEST_CASE("sample_eyediap_frames even spacing") {
  SUBCASE("frame_count == per_video covers every frame") {
    const auto out = data::sample_eyediap_frames({{"v", 50}}, 50);
    REQUIRE(out.size() == 50);
    for (int i = 0; i < 50; ++i) CHECK(out[i].second == i);
  }
  SUBCASE("frame_count 100 gives stride 2") {
    const auto out = data::sample_eyediap_frames({{"v", 100}}, 50);
    REQUIRE(out.size() == 50);
    for (int i = 0; i < 50; ++i) CHECK(out[i].second == 2 * i);
  }
  SUBCASE("35 videos x 50 = 1750") {
    Rng rng(35);
    std::vector<data::VideoIndexEntry> index;
    for (int i = 0; i < 35; ++i)
      index.push_back({"v" + std::to_string(i), rng.uniform_int(50, 3000)});
    const auto out = data::sample_eyediap_frames(index);
    CHECK(out.size() == 1750);
    // Strictly increasing and in-bounds per video.
    for (size_t i = 1; i < out.size(); ++i)
      if (out[i].first == out[i - 1].first)
        CHECK(out[i].second > out[i - 1].second);
    size_t k = 0;
    for (const auto& v : index)
      for (int i = 0; i < 50; ++i, ++k) CHECK(out[k].second < v.frame_count);
  }
  SUBCASE("short video rejected by name") {
    try {
      data::sample_eyediap_frames({{"ok", 60}, {"short_one", 49}});
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("short_one") != std::string::npos);
    }
  }
}

TEST_CASE("build_gt_heatmap places a peak-1 Gaussian at the target cell") {
  const HeatmapGrid hm = data::build_gt_heatmap({0.5, 0.5});
  CHECK(hm.at(32, 32) == 1.0);
  CHECK(hm.in_unit_range());
  const Point rt = argmax_point(hm);
  CHECK(std::abs(rt.x - 0.5) <= 1.0 / 128.0 + 1e-12);
  CHECK(std::abs(rt.y - 0.5) <= 1.0 / 128.0 + 1e-12);
}

TEST_CASE("build_gt_heatmap mass approximates 2*pi*sigma^2") {
  const double sigma = 3.0;
  const HeatmapGrid hm = data::build_gt_heatmap({0.5, 0.5}, 64, sigma);
  double sum = 0.0;
  for (double v : hm.values()) sum += v;
  const double expected = 2.0 * 3.141592653589793 * sigma * sigma;
  CHECK(std::abs(sum - expected) / expected < 0.02);
}

TEST_CASE("build_gt_heatmap argmax round-trip within half a cell") {
  Rng rng(36);
  for (int trial = 0; trial < 30; ++trial) {
    const Point t{rng.uniform(), rng.uniform()};
    const Point rt = argmax_point(data::build_gt_heatmap(t));
    CHECK(std::abs(rt.x - t.x) <= 1.0 / 128.0 + 1e-12);
    CHECK(std::abs(rt.y - t.y) <= 1.0 / 128.0 + 1e-12);
  }
}

TEST_CASE("augment: deterministic, photometric-only, fixed output size") {
  const FrameImage img = testutil::noise_image(60, 40, 37, 255);
  const HeadBox head{0.1, 0.1, 0.5, 0.5, 1.0};
  const std::optional<Point> target = Point{0.7, 0.3};

  const auto a = data::augment(img, head, target, 99);
  const auto b = data::augment(img, head, target, 99);
  CHECK(a.image == b.image);

  CHECK(a.image.width() == 448);
  CHECK(a.image.height() == 448);
  CHECK(a.head.x_min == head.x_min);
  CHECK(a.head.y_max == head.y_max);
  REQUIRE(a.target.has_value());
  CHECK(a.target->x == target->x);
  CHECK(a.target->y == target->y);

  const auto c = data::augment(img, head, target, 100);
  CHECK(a.image.byte_size() == c.image.byte_size());
}

TEST_CASE("load_unified: empty file, rejects with line numbers, source counts") {
  testutil::TempDir tmp;

  SUBCASE("empty manifest") {
    const std::string path = tmp.file("empty.jsonl");
    testutil::write_file(path, "");
    const auto rep = data::load_unified(path);
    CHECK(rep.samples.empty());
    CHECK(rep.rejects.empty());
  }

  SUBCASE("IFT without target is rejected with its line number") {
    const std::string path = tmp.file("bad.jsonl");
    testutil::write_file(
        path,
        R"({"image":"a.png","box":[0.1,0.1,0.4,0.5],"label":"EC","target":null,"source":"s1"})"
        "\n"
        R"({"image":"b.png","box":[0.1,0.1,0.4,0.5],"label":"IFT","target":null,"source":"s1"})"
        "\n"
        R"({"image":"c.png","box":[0.1,0.1,0.4,0.5],"label":"IFT","target":[0.5,0.5],"source":"s2"})"
        "\n");
    const auto rep = data::load_unified(path);
    CHECK(rep.samples.size() == 2);
    REQUIRE(rep.rejects.size() == 1);
    CHECK(rep.rejects[0].line == 2);
    CHECK(rep.per_source.at("s1") == 1);
    CHECK(rep.per_source.at("s2") == 1);
  }

  SUBCASE("three-source fixture of 30 lines keeps per-source counts") {
    std::vector<data::AnnotatedSample> samples;
    const char* sources[3] = {"alpha", "beta", "gamma"};
    const size_t counts[3] = {12, 10, 8};
    for (int s = 0; s < 3; ++s)
      for (size_t i = 0; i < counts[s]; ++i) {
        data::AnnotatedSample a;
        a.image_ref = std::string(sources[s]) + std::to_string(i) + ".png";
        a.head = {0.1, 0.1, 0.6, 0.6, 1.0};
        a.label = Label::kIFT;
        a.target = Point{0.5, 0.5};
        a.source = sources[s];
        samples.push_back(a);
      }
    const std::string path = tmp.file("mixed.jsonl");
    data::save_manifest(samples, path);
    const auto rep = data::load_unified(path);
    CHECK(rep.samples.size() == 30);
    CHECK(rep.rejects.empty());
    for (int s = 0; s < 3; ++s) CHECK(rep.per_source.at(sources[s]) == counts[s]);
  }

  SUBCASE("missing image detection when enabled") {
    const std::string path = tmp.file("imgs.jsonl");
    testutil::write_file(
        path,
        R"({"image":"gone.png","box":[0.1,0.1,0.4,0.5],"label":"OFT","target":null,"source":"s"})"
        "\n");
    CHECK(data::load_unified(path, false).samples.size() == 1);
    const auto strict = data::load_unified(path, true);
    CHECK(strict.samples.empty());
    REQUIRE(strict.rejects.size() == 1);
    CHECK(strict.rejects[0].reason.find("missing image") != std::string::npos);
  }

  SUBCASE("malformed JSON is rejected, not fatal") {
    const std::string path = tmp.file("mixed_bad.jsonl");
    testutil::write_file(
        path,
        "this is not json\n"
        R"({"image":"ok.png","box":[0.1,0.1,0.4,0.5],"label":"OFT","target":null,"source":"s"})"
        "\n");
    const auto rep = data::load_unified(path);
    CHECK(rep.samples.size() == 1);
    REQUIRE(rep.rejects.size() == 1);
    CHECK(rep.rejects[0].line == 1);
  }
}

TEST_CASE("converters emit the unified schema with source labeling rules") {
  testutil::TempDir tmp;
  namespace fs = std::filesystem;

  SUBCASE("mpii: geometric rule decides EC vs OFT") {
    fs::create_directories(tmp.file("mpii"));
    testutil::write_file(tmp.file("mpii/records.csv"),
                         "image,x0,y0,x1,y1,fc_x,fc_y,fc_z,gt_x,gt_y,gt_z\n"
                         "a.png,0.1,0.1,0.5,0.5,0,0,600,0,0,0\n"       // EC
                         "b.png,0.1,0.1,0.5,0.5,200,0,600,200,0,0\n"); // OFT
    const auto stats = data::convert_dataset("mpii", tmp.file("mpii"),
                                             tmp.file("mpii.jsonl"));
    CHECK(stats.total == 2);
    CHECK(stats.per_label.at("EC") == 1);
    CHECK(stats.per_label.at("OFT") == 1);
    const auto rep = data::load_unified(tmp.file("mpii.jsonl"));
    CHECK(rep.rejects.empty());
    CHECK(rep.samples[0].label == Label::kEC);
  }

  SUBCASE("columbia: zero-angle rule") {
    fs::create_directories(tmp.file("col"));
    testutil::write_file(tmp.file("col/records.csv"),
                         "a.png,0.1,0.1,0.5,0.5,0,0\n"
                         "b.png,0.1,0.1,0.5,0.5,0,10\n"
                         "c.png,0.1,0.1,0.5,0.5,-10,0\n");
    const auto stats = data::convert_dataset("columbia", tmp.file("col"),
                                             tmp.file("col.jsonl"));
    CHECK(stats.per_label.at("EC") == 1);
    CHECK(stats.per_label.at("OFT") == 2);
  }

  SUBCASE("gazefollow and vat") {
    fs::create_directories(tmp.file("gf"));
    testutil::write_file(tmp.file("gf/annotations.csv"),
                         "a.png,0.1,0.1,0.5,0.5,0.7,0.8\n");
    const auto gf = data::convert_dataset("gazefollow", tmp.file("gf"),
                                          tmp.file("gf.jsonl"));
    CHECK(gf.per_label.at("IFT") == 1);

    fs::create_directories(tmp.file("vat"));
    testutil::write_file(tmp.file("vat/annotations.csv"),
                         "a.png,0.1,0.1,0.5,0.5,1,0.7,0.8\n"
                         "b.png,0.1,0.1,0.5,0.5,0\n");
    const auto vat =
        data::convert_dataset("vat", tmp.file("vat"), tmp.file("vat.jsonl"));
    CHECK(vat.per_label.at("IFT") == 1);
    CHECK(vat.per_label.at("OFT") == 1);
    CHECK(vat.oft_fraction == doctest::Approx(0.5));
  }

  SUBCASE("eyediap: sampling plus visibility labels, fraction reported") {
    fs::create_directories(tmp.file("ed/targets"));
    testutil::write_file(tmp.file("ed/videos.csv"), "vid_a,50\n");
    std::string targets;
    for (int f = 0; f < 50; ++f) {
      // Frames 0..19 out of frame, 20..49 visible.
      const bool vis = f >= 20;
      targets += std::to_string(f) + "," + (vis ? "1" : "0") + ",0.5,0.5," +
                 "0.2,0.2,0.6,0.6\n";
    }
    testutil::write_file(tmp.file("ed/targets/vid_a.csv"), targets);
    const auto stats = data::convert_dataset("eyediap", tmp.file("ed"),
                                             tmp.file("ed.jsonl"));
    CHECK(stats.total == 50);
    CHECK(stats.per_label.at("OFT") == 20);
    CHECK(stats.per_label.at("IFT") == 30);
    CHECK(stats.oft_fraction == doctest::Approx(0.4));
  }

  SUBCASE("unknown source is rejected") {
    CHECK_THROWS_AS(data::convert_dataset("webcamgaze", ".", tmp.file("x.jsonl")),
                    DataError);
  }
}
