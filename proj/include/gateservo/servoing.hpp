#pragma once

#include "gateservo/geometry.hpp"

#include <Eigen/Dense>

#include <span>

namespace gateservo {

struct IbvsConfig {
  double lambda{0.5};             // positive gain, 1/s
  double depth_assumed{0.5};      // constant feature depth Z, m
  double error_threshold_px{8.0};
  double max_linear_speed{2.0};   // m/s, clamp on |v_body|
  double max_yaw_rate{1.5};       // rad/s
  int min_visible_corners{2};
  double search_yaw_rate{0.5};    // rad/s spin when under-determined
};

/// Body-frame velocity command: forward, left, up + yaw rate.
struct VelocityCommand {
  Eigen::Vector3d v_body{0.0, 0.0, 0.0};
  double yaw_rate{0.0};
};

/// 2 rows per corner used, columns (v_x^cam, v_y^cam, v_z^cam, w_y^cam).
using InteractionMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

/// Point-feature interaction matrix over the corners visible in fv, with the
/// camera-frame roll and pitch rate columns removed. Constant depth Z for
/// every corner. Throws std::invalid_argument if fewer than min_visible
/// corners are visible.
InteractionMatrix interaction_matrix(const FeatureVec& fv,
                                     const CameraModel& cam, double Z,
                                     int min_visible = 1);

/// Per-corner depth variant (exact Jacobian, used for verification).
InteractionMatrix interaction_matrix(const FeatureVec& fv,
                                     const CameraModel& cam,
                                     std::span<const double, 4> depths,
                                     int min_visible = 1);

/// Moore-Penrose pseudo-inverse via SVD with singular-value cutoff
/// tol_factor * sigma_max.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m,
                               double tol_factor = 1e-6);

/// Corner features of a centered, frontal gate at the given distance.
FeatureVec desired_features(double gate_side, double distance,
                            const CameraModel& cam);

struct IbvsResult {
  VelocityCommand cmd;
  double error_px{0.0};  // RMS over visible pixel coordinates; +inf when searching
  bool searching{false};
};

/// One IBVS evaluation: v_cam = lambda * pinv(L) * (p* - p) over the corners
/// visible in `measured`, in normalized image units, mapped to a body-frame
/// command and clamped. Returns the search command (spin in place) when
/// fewer than cfg.min_visible_corners corners are visible.
IbvsResult ibvs_step(const FeatureVec& measured, const FeatureVec& desired,
                     const IbvsConfig& cfg, const CameraModel& cam);

}  // namespace gateservo
