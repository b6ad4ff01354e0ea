#include "gateservo/servoing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gateservo {

namespace {

InteractionMatrix build_matrix(const FeatureVec& fv, const CameraModel& cam,
                               const std::array<double, 4>& depths,
                               int min_visible) {
  const int n_vis = fv.visible_count();
  if (n_vis < min_visible) {
    throw std::invalid_argument("interaction_matrix: insufficient features");
  }
  InteractionMatrix L(2 * n_vis, 4);
  int row = 0;
  for (int i = 0; i < 4; ++i) {
    if (!fv.visible[i]) continue;
    const double Z = depths[i];
    if (!(Z > 0.0)) {
      throw std::invalid_argument("interaction_matrix: depth must be > 0");
    }
    const double x = (fv.coords[2 * i] - cam.cx) / cam.fx;
    const double y = (fv.coords[2 * i + 1] - cam.cy) / cam.fy;
    L.row(row++) << -1.0 / Z, 0.0, x / Z, -(1.0 + x * x);
    L.row(row++) << 0.0, -1.0 / Z, y / Z, -x * y;
  }
  return L;
}

}  // namespace

InteractionMatrix interaction_matrix(const FeatureVec& fv,
                                     const CameraModel& cam, double Z,
                                     int min_visible) {
  return build_matrix(fv, cam, {Z, Z, Z, Z}, min_visible);
}

InteractionMatrix interaction_matrix(const FeatureVec& fv,
                                     const CameraModel& cam,
                                     std::span<const double, 4> depths,
                                     int min_visible) {
  return build_matrix(fv, cam, {depths[0], depths[1], depths[2], depths[3]},
                      min_visible);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double tol_factor) {
  if (m.size() == 0) throw std::invalid_argument("pseudo_inverse: empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol_factor * sv(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

FeatureVec desired_features(double gate_side, double distance,
                            const CameraModel& cam) {
  if (!(distance > 0.0)) {
    throw std::invalid_argument("desired_features: distance must be > 0");
  }
  const double du = cam.fx * (gate_side / 2.0) / distance;
  const double dv = cam.fy * (gate_side / 2.0) / distance;
  FeatureVec fv;
  fv.coords = {cam.cx - du, cam.cy - dv, cam.cx + du, cam.cy - dv,
               cam.cx + du, cam.cy + dv, cam.cx - du, cam.cy + dv};
  fv.visible = {true, true, true, true};
  return fv;
}

IbvsResult ibvs_step(const FeatureVec& measured, const FeatureVec& desired,
                     const IbvsConfig& cfg, const CameraModel& cam) {
  IbvsResult res;
  const int n_vis = measured.visible_count();
  if (n_vis < cfg.min_visible_corners) {
    res.cmd.v_body.setZero();
    res.cmd.yaw_rate = cfg.search_yaw_rate;
    res.error_px = std::numeric_limits<double>::infinity();
    res.searching = true;
    return res;
  }

  Eigen::VectorXd e(2 * n_vis);
  double sq_px = 0.0;
  int row = 0;
  for (int i = 0; i < 4; ++i) {
    if (!measured.visible[i]) continue;
    const double du = desired.coords[2 * i] - measured.coords[2 * i];
    const double dv = desired.coords[2 * i + 1] - measured.coords[2 * i + 1];
    e(row++) = du / cam.fx;
    e(row++) = dv / cam.fy;
    sq_px += du * du + dv * dv;
  }
  res.error_px = std::sqrt(sq_px / (2.0 * n_vis));

  const InteractionMatrix L =
      interaction_matrix(measured, cam, cfg.depth_assumed, cfg.min_visible_corners);
  const Eigen::Vector4d v_cam = cfg.lambda * (pseudo_inverse(L) * e);

  // camera (right, down, forward, w about down) -> body (fwd, left, up, yaw)
  res.cmd.v_body = {v_cam(2), -v_cam(0), -v_cam(1)};
  res.cmd.yaw_rate = -v_cam(3);

  const double speed = res.cmd.v_body.norm();
  if (speed > cfg.max_linear_speed) {
    res.cmd.v_body *= cfg.max_linear_speed / speed;
  }
  res.cmd.yaw_rate =
      std::clamp(res.cmd.yaw_rate, -cfg.max_yaw_rate, cfg.max_yaw_rate);
  return res;
}

}  // namespace gateservo
