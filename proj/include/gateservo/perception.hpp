#pragma once

#include "gateservo/geometry.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace gateservo {

enum class PerceptionKind { kOracle, kGaussianNoise, kFeatureMap };

enum class DecodeMode {
  kBinCenter,  // pixel = bin_width*i + bin_width/2
  kEndpoint,   // pixel = i*(width-1)/(map_size-1)
};

/// Stand-in for the neural gate detector. kOracle returns ground truth,
/// kGaussianNoise perturbs each visible coordinate, kFeatureMap routes the
/// truth through the corner-heatmap codec (encode, map-space noise, argmax
/// decode).
struct PerceptionConfig {
  PerceptionKind kind{PerceptionKind::kOracle};
  double sigma_px{0.0};      // per-coordinate noise std (gaussian kind)
  int map_size{20};
  double sigma_bins{1.0};    // heatmap falloff, in bins
  double map_noise{0.0};     // additive noise std on map cells (featuremap kind)
  DecodeMode decode_mode{DecodeMode::kBinCenter};
  int latency_steps{1};      // control periods of perception delay
  std::uint64_t seed{0};
};

/// Deterministic standard-normal sampler (Box-Muller over mt19937_64).
/// Bit-reproducible for a given seed and call sequence.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next();

 private:
  std::mt19937_64 rng_;
  double spare_{0.0};
  bool has_spare_{false};
};

/// One map_size x map_size grid per corner, values in [0,1]. Grids are
/// stored row-major over (i = u bin, j = v bin).
struct FeatureMapSet {
  int map_size{20};
  std::array<std::vector<double>, 4> maps;

  double& at(int corner, int i, int j) {
    return maps[corner][static_cast<std::size_t>(i) * map_size + j];
  }
  double at(int corner, int i, int j) const {
    return maps[corner][static_cast<std::size_t>(i) * map_size + j];
  }
  /// First-wins argmax in row-major order.
  std::pair<int, int> argmax(int corner) const;
};

struct ConvLayerSpec {
  int kernel{1};
  int stride{1};
};

FeatureVec perceive(const FeatureVec& truth, const PerceptionConfig& cfg,
                    GaussianSampler& rng);

/// Gaussian corner heatmaps: map[i][j] = exp(-d^2 / (2*sigma_bins^2)) with d
/// the distance from the bin center to the corner, in bin units
/// (bin width = width/map_size). Coordinates are clamped into the image
/// first.
FeatureMapSet encode_featuremaps(const FeatureVec& fv, int map_size,
                                 double sigma_bins, int width = 160,
                                 int height = 160);

/// Argmax decode back to pixel coordinates; every corner is marked visible.
FeatureVec decode_featuremaps(const FeatureMapSet& fm,
                              DecodeMode mode = DecodeMode::kBinCenter,
                              int width = 160, int height = 160);

/// Root-mean-square error over all coordinates of corners visible in the
/// truth. Throws std::invalid_argument on length mismatch or empty input.
double rmse_eval(std::span<const FeatureVec> predictions,
                 std::span<const FeatureVec> truths);

struct RmseReport {
  double overall{0.0};
  std::array<double, 4> per_corner{};      // NaN for corners never visible
  std::array<std::size_t, 4> samples{};    // visible samples per corner
};

RmseReport rmse_report(std::span<const FeatureVec> predictions,
                       std::span<const FeatureVec> truths);

/// Receptive field of a convolutional stack: r=1, j=1; r += (k-1)*j,
/// j *= s per layer, applied in order.
int receptive_field(std::span<const ConvLayerSpec> layers);

}  // namespace gateservo
