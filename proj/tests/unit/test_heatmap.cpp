#include <cmath>

#include <doctest.h>

#include "posekit/errors.hpp"
#include "posekit/heatmap.hpp"
#include "posekit/rng.hpp"

using namespace posekit;

namespace {

// Identity-like transform: the source box covers the whole patch at scale 1.
PatchTransform identity_transform() {
  PatchTransform t;
  t.scale = 1.0;
  t.pad_x = 0.0;
  t.pad_y = 0.0;
  t.src_box = {0, 0, kPatchWidth, kPatchHeight, std::nullopt};
  return t;
}

KeypointSet single_visible(int index, double x, double y) {
  KeypointSet kps;
  kps.points[index] = {x, y, 2};
  return kps;
}

}  // namespace

TEST_CASE("encode peak and neighbor values") {
  CodecConfig cfg;
  const HeatmapStack hm = encode(single_visible(0, 96, 128), cfg);
  // Mean lands on cell (row 32, col 24) exactly.
  CHECK(hm.at(0, 32, 24) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hm.at(0, 32, 25) == doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(1e-9));
  CHECK(hm.at(0, 33, 24) == doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(1e-9));
  // Other channels stay flat.
  CHECK(hm.at(5, 32, 24) == 0.0);
}

TEST_CASE("encode all-invisible gives an all-zero stack") {
  CodecConfig cfg;
  KeypointSet kps;
  const HeatmapStack hm = encode(kps, cfg);
  for (double v : hm.data) {
    CHECK(v == 0.0);
  }
}

TEST_CASE("encode values stay within [0,1]") {
  CodecConfig cfg;
  Rng rng(3);
  KeypointSet kps;
  for (int i = 0; i < kNumKeypoints; ++i) {
    kps.points[i] = {rng.uniform(0, kPatchWidth), rng.uniform(0, kPatchHeight), 2};
  }
  const HeatmapStack hm = encode(kps, cfg);
  for (double v : hm.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("mse_loss basics") {
  CodecConfig cfg;
  const HeatmapStack gt = encode(single_visible(0, 96, 128), cfg);
  std::array<bool, kNumKeypoints> mask{};
  mask[0] = true;

  CHECK(mse_loss(gt, gt, mask) == 0.0);

  // All-zero prediction against one visible channel: brute-force sum of the
  // squared target over that channel's cells.
  HeatmapStack zero;
  double expected = 0.0;
  for (int row = 0; row < gt.height; ++row) {
    for (int col = 0; col < gt.width; ++col) {
      expected += static_cast<double>(gt.at(0, row, col)) * gt.at(0, row, col);
    }
  }
  expected /= 48.0 * 64.0;
  CHECK(mse_loss(zero, gt, mask) == doctest::Approx(expected).epsilon(1e-12));

  std::array<bool, kNumKeypoints> none{};
  CHECK(mse_loss(zero, gt, none) == 0.0);
}

TEST_CASE("mse_loss symmetry and non-negativity") {
  CodecConfig cfg;
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    KeypointSet a, b;
    std::array<bool, kNumKeypoints> mask{};
    for (int i = 0; i < kNumKeypoints; ++i) {
      a.points[i] = {rng.uniform(0, 192), rng.uniform(0, 256), rng.next_double() < 0.8 ? 2 : 0};
      b.points[i] = {rng.uniform(0, 192), rng.uniform(0, 256), rng.next_double() < 0.8 ? 2 : 0};
      mask[i] = rng.next_double() < 0.7;
    }
    const HeatmapStack ha = encode(a, cfg);
    const HeatmapStack hb = encode(b, cfg);
    const double ab = mse_loss(ha, hb, mask);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(mse_loss(hb, ha, mask)).epsilon(1e-12));
  }
}

TEST_CASE("mse_loss dimension mismatch") {
  HeatmapStack a;
  HeatmapStack b(kNumKeypoints, 32, 24, 8);
  std::array<bool, kNumKeypoints> mask{};
  mask[0] = true;
  CHECK_THROWS_AS(mse_loss(a, b, mask), ContractError);
}

TEST_CASE("decode: confidence equals channel maximum; thresholding") {
  CodecConfig cfg;
  const auto t = identity_transform();

  SUBCASE("uniform zeros decode as invisible with confidence 0") {
    HeatmapStack hm;
    const KeypointSet out = decode(hm, t, cfg);
    for (int i = 0; i < kNumKeypoints; ++i) {
      CHECK(out.points[i].v == 0);
      CHECK(out.confidences[i] == 0.0);
    }
  }

  SUBCASE("peak below the 0.4 threshold is marked invisible, above visible") {
    HeatmapStack hm;
    hm.at(0, 10, 10) = 0.35;
    hm.at(1, 20, 20) = 0.45;
    const KeypointSet out = decode(hm, t, cfg);
    CHECK(out.points[0].v == 0);
    CHECK(out.confidences[0] == doctest::Approx(0.35));
    // Below-threshold points keep their raw coordinates.
    CHECK(out.points[0].x == doctest::Approx(40.0));
    CHECK(out.points[1].v == 2);
    CHECK(out.confidences[1] == doctest::Approx(0.45));
  }

  SUBCASE("exact threshold counts as visible") {
    HeatmapStack hm;
    hm.at(0, 10, 10) = 0.4;
    const KeypointSet out = decode(hm, t, cfg);
    CHECK(out.points[0].v == 2);
  }
}

TEST_CASE("decode confidence equals channel max on encoded stacks") {
  CodecConfig cfg;
  Rng rng(9);
  const auto t = identity_transform();
  for (int trial = 0; trial < 20; ++trial) {
    KeypointSet kps;
    for (int i = 0; i < kNumKeypoints; ++i) {
      kps.points[i] = {rng.uniform(20, 170), rng.uniform(20, 230), 2};
    }
    const HeatmapStack hm = encode(kps, cfg);
    const KeypointSet out = decode(hm, t, cfg);
    for (int i = 0; i < kNumKeypoints; ++i) {
      double max_v = 0.0;
      for (int row = 0; row < hm.height; ++row) {
        for (int col = 0; col < hm.width; ++col) {
          max_v = std::max(max_v, hm.at(i, row, col));
        }
      }
      CHECK(out.confidences[i] == doctest::Approx(max_v).epsilon(1e-12));
    }
  }
}

TEST_CASE("encode-decode round trip bounds") {
  CodecConfig cfg;
  const auto t = identity_transform();
  Rng rng(101);
  // Keypoints kept >= 2 sigma cells from the heatmap border.
  const double margin = 2.0 * cfg.sigma * cfg.stride;

  double worst_refined = 0.0;
  double worst_raw = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    KeypointSet kps;
    for (int i = 0; i < kNumKeypoints; ++i) {
      kps.points[i] = {rng.uniform(margin, kPatchWidth - margin),
                       rng.uniform(margin, kPatchHeight - margin), 2};
    }
    const HeatmapStack hm = encode(kps, cfg);

    CodecConfig raw_cfg = cfg;
    raw_cfg.subpixel_refine = false;
    const KeypointSet refined = decode(hm, t, cfg);
    const KeypointSet raw = decode(hm, t, raw_cfg);
    for (int i = 0; i < kNumKeypoints; ++i) {
      const double er = std::hypot(refined.points[i].x - kps.points[i].x,
                                   refined.points[i].y - kps.points[i].y);
      const double eu = std::hypot(raw.points[i].x - kps.points[i].x,
                                   raw.points[i].y - kps.points[i].y);
      // Per-axis bounds; the hypot of the per-axis worst cases.
      worst_refined = std::max(worst_refined, er);
      worst_raw = std::max(worst_raw, eu);
      CHECK(std::abs(refined.points[i].x - kps.points[i].x) <= 0.25 * cfg.stride + 1e-9);
      CHECK(std::abs(refined.points[i].y - kps.points[i].y) <= 0.25 * cfg.stride + 1e-9);
      CHECK(std::abs(raw.points[i].x - kps.points[i].x) <= 0.5 * cfg.stride + 1e-9);
      CHECK(std::abs(raw.points[i].y - kps.points[i].y) <= 0.5 * cfg.stride + 1e-9);
      CHECK(refined.confidences[i] > 0.9);
    }
  }
  // Refinement should actually tighten the bound, not just not break it.
  CHECK(worst_refined < worst_raw);
}

TEST_CASE("decode monotone in threshold") {
  CodecConfig cfg;
  Rng rng(55);
  const auto t = identity_transform();
  HeatmapStack hm;
  for (int i = 0; i < kNumKeypoints; ++i) {
    hm.at(i, static_cast<int>(rng.uniform_int(0, 63)), static_cast<int>(rng.uniform_int(0, 47))) =
        static_cast<float>(rng.next_double());
  }
  int prev_visible = kNumKeypoints + 1;
  for (double thr = 0.0; thr <= 1.0; thr += 0.1) {
    CodecConfig c = cfg;
    c.kp_conf_threshold = thr;
    const KeypointSet out = decode(hm, t, c);
    CHECK(out.visible_count() <= prev_visible);
    prev_visible = out.visible_count();
  }
}

TEST_CASE("heatmap wire round trip") {
  CodecConfig cfg;
  Rng rng(77);
  KeypointSet kps;
  for (int i = 0; i < kNumKeypoints; ++i) {
    kps.points[i] = {rng.uniform(0, 192), rng.uniform(0, 256), 2};
  }
  const HeatmapStack hm = encode(kps, cfg);
  const std::vector<uint8_t> bytes = serialize_heatmap(hm);
  CHECK(bytes.size() == 16 + hm.data.size() * 4);
  const HeatmapStack back = deserialize_heatmap(bytes.data(), bytes.size());
  CHECK(back.channels == hm.channels);
  CHECK(back.height == hm.height);
  CHECK(back.width == hm.width);
  CHECK(back.stride == hm.stride);
  // The wire carries float32: round trip is exact at float precision.
  REQUIRE(back.data.size() == hm.data.size());
  for (size_t i = 0; i < hm.data.size(); ++i) {
    CHECK(back.data[i] == static_cast<double>(static_cast<float>(hm.data[i])));
  }

  CHECK_THROWS_AS(deserialize_heatmap(bytes.data(), bytes.size() - 4), ParseError);
  CHECK_THROWS_AS(deserialize_heatmap(bytes.data(), 8), ParseError);
}
