#include "gateservo/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gateservo {

double GaussianSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller on (0,1] uniforms; avoids log(0).
  const double k = 1.0 / (static_cast<double>(rng_.max()) + 1.0);
  const double u1 = (static_cast<double>(rng_()) + 1.0) * k;
  const double u2 = static_cast<double>(rng_()) * k;
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

std::pair<int, int> FeatureMapSet::argmax(int corner) const {
  const auto& m = maps[corner];
  int best = 0;
  for (int idx = 1; idx < static_cast<int>(m.size()); ++idx) {
    if (m[idx] > m[best]) best = idx;
  }
  return {best / map_size, best % map_size};
}

FeatureVec perceive(const FeatureVec& truth, const PerceptionConfig& cfg,
                    GaussianSampler& rng) {
  switch (cfg.kind) {
    case PerceptionKind::kOracle:
      return truth;
    case PerceptionKind::kGaussianNoise: {
      FeatureVec out = truth;
      for (int i = 0; i < 4; ++i) {
        if (!out.visible[i]) continue;
        out.coords[2 * i] += cfg.sigma_px * rng.next();
        out.coords[2 * i + 1] += cfg.sigma_px * rng.next();
      }
      return out;
    }
    case PerceptionKind::kFeatureMap: {
      FeatureMapSet fm = encode_featuremaps(truth, cfg.map_size, cfg.sigma_bins);
      if (cfg.map_noise > 0.0) {
        for (auto& m : fm.maps) {
          for (double& cell : m) {
            cell = std::clamp(cell + cfg.map_noise * rng.next(), 0.0, 1.0);
          }
        }
      }
      return decode_featuremaps(fm, cfg.decode_mode);
    }
  }
  return truth;
}

FeatureMapSet encode_featuremaps(const FeatureVec& fv, int map_size,
                                 double sigma_bins, int width, int height) {
  if (map_size < 2) throw std::invalid_argument("map_size must be >= 2");
  FeatureMapSet fm;
  fm.map_size = map_size;
  const double bw_u = static_cast<double>(width) / map_size;
  const double bw_v = static_cast<double>(height) / map_size;
  for (int c = 0; c < 4; ++c) {
    fm.maps[c].assign(static_cast<std::size_t>(map_size) * map_size, 0.0);
    const double u = std::clamp(fv.coords[2 * c], 0.0, width - 1.0);
    const double v = std::clamp(fv.coords[2 * c + 1], 0.0, height - 1.0);
    for (int i = 0; i < map_size; ++i) {
      const double du = (u - (bw_u * i + bw_u / 2.0)) / bw_u;
      for (int j = 0; j < map_size; ++j) {
        const double dv = (v - (bw_v * j + bw_v / 2.0)) / bw_v;
        const double d2 = du * du + dv * dv;
        fm.at(c, i, j) = std::exp(-d2 / (2.0 * sigma_bins * sigma_bins));
      }
    }
  }
  return fm;
}

FeatureVec decode_featuremaps(const FeatureMapSet& fm, DecodeMode mode,
                              int width, int height) {
  FeatureVec out;
  const int n = fm.map_size;
  const double bw_u = static_cast<double>(width) / n;
  const double bw_v = static_cast<double>(height) / n;
  for (int c = 0; c < 4; ++c) {
    const auto [i, j] = fm.argmax(c);
    if (mode == DecodeMode::kBinCenter) {
      out.coords[2 * c] = bw_u * i + bw_u / 2.0;
      out.coords[2 * c + 1] = bw_v * j + bw_v / 2.0;
    } else {
      out.coords[2 * c] = i * (width - 1.0) / (n - 1.0);
      out.coords[2 * c + 1] = j * (height - 1.0) / (n - 1.0);
    }
    out.visible[c] = true;
  }
  return out;
}

RmseReport rmse_report(std::span<const FeatureVec> predictions,
                       std::span<const FeatureVec> truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("rmse_eval: size mismatch");
  }
  if (truths.empty()) throw std::invalid_argument("rmse_eval: empty input");
  RmseReport rep;
  std::array<double, 4> sq{};
  double total_sq = 0.0;
  std::size_t total_n = 0;
  for (std::size_t s = 0; s < truths.size(); ++s) {
    for (int c = 0; c < 4; ++c) {
      if (!truths[s].visible[c]) continue;
      for (int k = 0; k < 2; ++k) {
        const double d =
            predictions[s].coords[2 * c + k] - truths[s].coords[2 * c + k];
        sq[c] += d * d;
        total_sq += d * d;
      }
      rep.samples[c] += 1;
      total_n += 2;
    }
  }
  if (total_n == 0) throw std::invalid_argument("rmse_eval: no visible corners");
  rep.overall = std::sqrt(total_sq / static_cast<double>(total_n));
  for (int c = 0; c < 4; ++c) {
    rep.per_corner[c] =
        rep.samples[c] > 0
            ? std::sqrt(sq[c] / (2.0 * static_cast<double>(rep.samples[c])))
            : std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

double rmse_eval(std::span<const FeatureVec> predictions,
                 std::span<const FeatureVec> truths) {
  return rmse_report(predictions, truths).overall;
}

int receptive_field(std::span<const ConvLayerSpec> layers) {
  if (layers.empty()) throw std::invalid_argument("receptive_field: no layers");
  long long r = 1, j = 1;
  for (const auto& l : layers) {
    if (l.kernel < 1 || l.stride < 1) {
      throw std::invalid_argument("receptive_field: kernel and stride must be >= 1");
    }
    r += static_cast<long long>(l.kernel - 1) * j;
    j *= l.stride;
  }
  return static_cast<int>(r);
}

}  // namespace gateservo
