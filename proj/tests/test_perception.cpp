#include <doctest.h>

#include "gateservo/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace gateservo;

namespace {

FeatureVec full_square() {
  FeatureVec fv;
  fv.coords = {40.0, 40.0, 120.0, 40.0, 120.0, 120.0, 40.0, 120.0};
  fv.visible = {true, true, true, true};
  return fv;
}

}  // namespace

TEST_CASE("gaussian sampler is seed-deterministic with unit moments") {
  GaussianSampler a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 16; ++i) {
    const double va = a.next();
    all_equal = all_equal && (va == b.next());
    any_diff = any_diff || (va != c.next());
  }
  CHECK(all_equal);
  CHECK(any_diff);

  GaussianSampler s(7);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = s.next();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.02);
  CHECK(sd == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("oracle perception is the identity and draws no randomness") {
  PerceptionConfig cfg;
  cfg.kind = PerceptionKind::kOracle;
  GaussianSampler rng(5);
  FeatureVec truth = full_square();
  truth.visible[2] = false;
  const FeatureVec out = perceive(truth, cfg, rng);
  for (int k = 0; k < 8; ++k) CHECK(out.coords[k] == truth.coords[k]);
  for (int i = 0; i < 4; ++i) CHECK(out.visible[i] == truth.visible[i]);
  GaussianSampler fresh(5);
  CHECK(rng.next() == fresh.next());
}

TEST_CASE("gaussian perception perturbs only visible corners") {
  PerceptionConfig cfg;
  cfg.kind = PerceptionKind::kGaussianNoise;
  cfg.sigma_px = 2.0;
  GaussianSampler rng(11);
  FeatureVec truth = full_square();
  truth.visible[1] = false;
  const FeatureVec out = perceive(truth, cfg, rng);
  CHECK(out.coords[2] == truth.coords[2]);
  CHECK(out.coords[3] == truth.coords[3]);
  CHECK(out.coords[0] != truth.coords[0]);
  for (int i = 0; i < 4; ++i) CHECK(out.visible[i] == truth.visible[i]);

  // residual spread matches sigma
  cfg.sigma_px = 1.45;
  GaussianSampler rng2(17);
  const FeatureVec base = full_square();
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const FeatureVec noisy = perceive(base, cfg, rng2);
    for (int k = 0; k < 8; ++k) {
      const double d = noisy.coords[k] - base.coords[k];
      sq += d * d;
    }
  }
  const double rms = std::sqrt(sq / (8.0 * n));
  CHECK(rms == doctest::Approx(1.45).epsilon(0.03));
}

TEST_CASE("heatmap encoding puts a gaussian falloff around the true bin") {
  FeatureVec fv;
  fv.coords[0] = 83.0;
  fv.coords[1] = 45.0;
  fv.visible = {true, false, false, false};
  const FeatureMapSet fm = encode_featuremaps(fv, 20, 1.0);
  REQUIRE(fm.map_size == 20);
  REQUIRE(fm.maps[0].size() == 400);
  // bin centers are at 8i+4; (83,45) lands nearest (10,5) = (84,44)
  CHECK(fm.at(0, 10, 5) == doctest::Approx(0.9844964370054085).epsilon(1e-12));
  CHECK(fm.at(0, 9, 5) == doctest::Approx(0.676633846161729).epsilon(1e-12));
  CHECK(fm.at(0, 10, 6) == doctest::Approx(0.676633846161729).epsilon(1e-12));
  CHECK(fm.at(0, 10, 4) == doctest::Approx(0.5269629692433709).epsilon(1e-12));
  CHECK(fm.at(0, 11, 5) == doctest::Approx(0.5269629692433709).epsilon(1e-12));
  CHECK(fm.argmax(0) == std::pair<int, int>(10, 5));
  // every cell is a valid activation
  for (double v : fm.maps[0]) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("encode clamps coordinates into the image") {
  FeatureVec fv;
  fv.coords[0] = 500.0;
  fv.coords[1] = -40.0;
  fv.visible[0] = true;
  const FeatureMapSet fm = encode_featuremaps(fv, 20, 1.0);
  CHECK(fm.argmax(0) == std::pair<int, int>(19, 0));
}

TEST_CASE("decode returns bin centers or endpoint-scaled coordinates") {
  FeatureVec fv;
  fv.coords = {83.0, 45.0, 4.0, 4.0, 155.0, 155.0, 80.0, 80.0};
  fv.visible = {true, true, true, true};
  const FeatureMapSet fm = encode_featuremaps(fv, 20, 1.0);

  const FeatureVec bc = decode_featuremaps(fm, DecodeMode::kBinCenter);
  CHECK(bc.coords[0] == doctest::Approx(84.0));
  CHECK(bc.coords[1] == doctest::Approx(44.0));
  CHECK(bc.coords[2] == doctest::Approx(4.0));
  CHECK(bc.coords[4] == doctest::Approx(156.0));
  for (int i = 0; i < 4; ++i) CHECK(bc.visible[i]);

  const FeatureVec ep = decode_featuremaps(fm, DecodeMode::kEndpoint);
  CHECK(ep.coords[0] == doctest::Approx(10.0 * 159.0 / 19.0).epsilon(1e-12));
  CHECK(ep.coords[1] == doctest::Approx(5.0 * 159.0 / 19.0).epsilon(1e-12));
}

TEST_CASE("argmax ties break to the first cell in row-major order") {
  FeatureMapSet fm;
  fm.map_size = 20;
  for (auto& m : fm.maps) m.assign(400, 0.25);
  CHECK(fm.argmax(0) == std::pair<int, int>(0, 0));
  fm.at(2, 7, 3) = 0.9;
  fm.at(2, 7, 4) = 0.9;  // same value, later cell
  CHECK(fm.argmax(2) == std::pair<int, int>(7, 3));
}

TEST_CASE("codec round-trip error is bounded by half a bin") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 159.0);
  double worst = 0.0, sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    FeatureVec fv;
    for (int c = 0; c < 4; ++c) {
      fv.coords[2 * c] = u(rng);
      fv.coords[2 * c + 1] = u(rng);
      fv.visible[c] = true;
    }
    const FeatureVec out =
        decode_featuremaps(encode_featuremaps(fv, 20, 1.0), DecodeMode::kBinCenter);
    for (int k = 0; k < 8; ++k) {
      const double err = std::abs(out.coords[k] - fv.coords[k]);
      worst = std::max(worst, err);
      sq += err * err;
    }
  }
  CHECK(worst <= 4.0 + 1e-9);
  // quantization noise of an 8 px bin: 8/sqrt(12) ~ 2.31
  CHECK(std::sqrt(sq / (8.0 * n)) == doctest::Approx(8.0 / std::sqrt(12.0)).epsilon(0.05));
}

TEST_CASE("featuremap perception decodes everything as visible") {
  PerceptionConfig cfg;
  cfg.kind = PerceptionKind::kFeatureMap;
  GaussianSampler rng(3);
  FeatureVec truth = full_square();
  truth.visible[3] = false;  // heatmap heads have no visibility channel
  const FeatureVec out = perceive(truth, cfg, rng);
  for (int i = 0; i < 4; ++i) CHECK(out.visible[i]);
  // 40 px sits exactly between bin centers 36 and 44: first bin wins the tie
  CHECK(out.coords[0] == doctest::Approx(36.0));
  CHECK(out.coords[2] == doctest::Approx(116.0));
}

TEST_CASE("map noise perturbs activations but keeps decodes in-image") {
  PerceptionConfig cfg;
  cfg.kind = PerceptionKind::kFeatureMap;
  cfg.map_noise = 0.4;
  GaussianSampler rng(9);
  const FeatureVec truth = full_square();
  bool moved = false;
  for (int i = 0; i < 50; ++i) {
    const FeatureVec out = perceive(truth, cfg, rng);
    for (int k = 0; k < 8; ++k) {
      CHECK(out.coords[k] >= 0.0);
      CHECK(out.coords[k] <= 159.0);
      moved = moved || std::abs(out.coords[k] - truth.coords[k]) > 4.0;
    }
  }
  CHECK(moved);  // strong map noise must displace some argmax
}

TEST_CASE("rmse matches hand-computed values and its invariances") {
  FeatureVec t = full_square();
  FeatureVec p = t;
  std::vector<FeatureVec> truths{t}, preds{p};
  CHECK(rmse_eval(preds, truths) == doctest::Approx(0.0));

  // one visible corner with a (3,4) offset: sqrt((9+16)/2)
  FeatureVec t1;
  t1.coords[0] = 10.0;
  t1.coords[1] = 20.0;
  t1.visible = {true, false, false, false};
  FeatureVec p1 = t1;
  p1.coords[0] += 3.0;
  p1.coords[1] += 4.0;
  CHECK(rmse_eval(std::vector<FeatureVec>{p1}, std::vector<FeatureVec>{t1}) ==
        doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));

  // scaling errors scales the rmse linearly
  FeatureVec p2 = t1;
  p2.coords[0] += 6.0;
  p2.coords[1] += 8.0;
  CHECK(rmse_eval(std::vector<FeatureVec>{p2}, std::vector<FeatureVec>{t1}) ==
        doctest::Approx(2.0 * std::sqrt(12.5)).epsilon(1e-12));

  // permutation invariance
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 159.0);
  std::vector<FeatureVec> ts, ps;
  for (int i = 0; i < 64; ++i) {
    FeatureVec tv, pv;
    for (int k = 0; k < 8; ++k) {
      tv.coords[k] = u(rng);
      pv.coords[k] = u(rng);
    }
    tv.visible = pv.visible = {true, true, true, true};
    ts.push_back(tv);
    ps.push_back(pv);
  }
  const double before = rmse_eval(ps, ts);
  std::vector<std::size_t> idx(ts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<FeatureVec> ts2, ps2;
  for (auto i : idx) {
    ts2.push_back(ts[i]);
    ps2.push_back(ps[i]);
  }
  CHECK(rmse_eval(ps2, ts2) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("rmse rejects malformed input") {
  std::vector<FeatureVec> one(1), two(2);
  CHECK_THROWS_AS((void)rmse_eval(one, two), std::invalid_argument);
  CHECK_THROWS_AS((void)rmse_eval(std::vector<FeatureVec>{}, std::vector<FeatureVec>{}),
                  std::invalid_argument);
  // nothing visible anywhere
  CHECK_THROWS_AS((void)rmse_eval(one, one), std::invalid_argument);
}

TEST_CASE("per-corner report separates corners and flags missing ones") {
  FeatureVec t;
  t.coords = {10.0, 10.0, 50.0, 50.0, 0.0, 0.0, 0.0, 0.0};
  t.visible = {true, true, false, false};
  FeatureVec p = t;
  p.coords[0] += 1.0;  // corner 0 err (1,0)
  p.coords[3] += 2.0;  // corner 1 err (0,2)
  const RmseReport rep = rmse_report(std::vector<FeatureVec>{p}, std::vector<FeatureVec>{t});
  CHECK(rep.per_corner[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(rep.per_corner[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::isnan(rep.per_corner[2]));
  CHECK(rep.samples[0] == 1);
  CHECK(rep.samples[2] == 0);
  CHECK(rep.overall == doctest::Approx(std::sqrt(5.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("dummy-mean predictor scores the pooled truth deviation") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 159.0);
  const int n = 500;
  std::vector<FeatureVec> ts(n);
  std::array<double, 8> mean{};
  for (auto& tv : ts) {
    for (int k = 0; k < 8; ++k) {
      tv.coords[k] = u(rng);
      mean[k] += tv.coords[k];
    }
    tv.visible = {true, true, true, true};
  }
  for (auto& m : mean) m /= n;
  std::vector<FeatureVec> ps(n);
  double pooled_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    ps[i].visible = {true, true, true, true};
    for (int k = 0; k < 8; ++k) {
      ps[i].coords[k] = mean[k];
      const double d = ts[i].coords[k] - mean[k];
      pooled_sq += d * d;
    }
  }
  const double pooled_std = std::sqrt(pooled_sq / (8.0 * n));
  CHECK(rmse_eval(ps, ts) == doctest::Approx(pooled_std).epsilon(1e-12));
}

TEST_CASE("receptive field recursion and composition") {
  using L = ConvLayerSpec;
  std::vector<L> one{{3, 1}};
  CHECK(receptive_field(one) == 3);
  std::vector<L> two{{3, 1}, {3, 1}};
  CHECK(receptive_field(two) == 5);
  std::vector<L> mix{{3, 1}, {2, 2}, {3, 1}};
  CHECK(receptive_field(mix) == 8);
  std::vector<L> deep{{3, 2}, {3, 2}, {3, 2}, {3, 2}, {3, 2}};
  CHECK(receptive_field(deep) == 63);
  std::vector<L> identity{{1, 1}};
  CHECK(receptive_field(identity) == 1);

  CHECK_THROWS_AS((void)receptive_field(std::vector<L>{}), std::invalid_argument);
  CHECK_THROWS_AS((void)receptive_field(std::vector<L>{{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS((void)receptive_field(std::vector<L>{{3, 0}}), std::invalid_argument);

  // composition: RF(A++B) = RF(A) + (RF(B)-1) * jump(A)
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> k(1, 7), s(1, 3), len(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<L> a, b;
    for (int i = len(rng); i > 0; --i) a.push_back({k(rng), s(rng)});
    for (int i = len(rng); i > 0; --i) b.push_back({k(rng), s(rng)});
    long long jump = 1;
    for (const auto& l : a) jump *= l.stride;
    std::vector<L> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    CHECK(receptive_field(ab) ==
          receptive_field(a) + (receptive_field(b) - 1) * jump);
  }
}
