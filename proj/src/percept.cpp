#include "seatrack/percept.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seatrack {

void CameraIntrinsics::validate() const {
  if (!(f > 0.0)) throw std::invalid_argument("f must be > 0");
  if (!(baseline > 0.0)) throw std::invalid_argument("baseline must be > 0");
  if (!(0.0 < d_min && d_min < d_max)) throw std::invalid_argument("d_min and d_max must satisfy 0 < d_min < d_max");
  if (!(0.0 < z_min && z_min < z_max)) throw std::invalid_argument("z_min and z_max must satisfy 0 < z_min < z_max");
  if (width <= 0 || height <= 0) throw std::invalid_argument("width and height must be positive");
  if (z_clamp_slack < 0.0) throw std::invalid_argument("z_clamp_slack must be >= 0");
}

void DetectorModel::validate() const {
  if (!(p_det >= 0.0 && p_det <= 1.0)) throw std::invalid_argument("p_det must be in [0,1]");
  if (sigma_d < 0.0) throw std::invalid_argument("sigma_d must be >= 0");
  if (lambda_fp < 0.0) throw std::invalid_argument("lambda_fp must be >= 0");
  if (!(0.0 <= conf_lo && conf_lo <= conf_hi && conf_hi <= 1.0)) {
    throw std::invalid_argument("conf_lo and conf_hi must satisfy 0 <= lo <= hi <= 1");
  }
  if (patch_size < 1) throw std::invalid_argument("patch_size must be >= 1");
  if (min_support < 1) throw std::invalid_argument("min_support must be >= 1");
}

std::optional<double> median_disparity(const Detection& det, const CameraIntrinsics& intr, int min_support) {
  std::vector<double> valid;
  valid.reserve(det.disparity_patch.size());
  for (double d : det.disparity_patch) {
    if (d >= intr.d_min && d <= intr.d_max) valid.push_back(d);
  }
  if (static_cast<int>(valid.size()) < min_support) return std::nullopt;

  std::sort(valid.begin(), valid.end());
  const std::size_t n = valid.size();
  if (n % 2 == 1) return valid[n / 2];
  return 0.5 * (valid[n / 2 - 1] + valid[n / 2]);
}

std::optional<Vec3> back_project(double u, double v, double d, const CameraIntrinsics& intr) {
  if (!(d >= intr.d_min && d <= intr.d_max)) return std::nullopt;
  const double z_raw = intr.f * intr.baseline / d;
  if (z_raw < intr.z_min - intr.z_clamp_slack || z_raw > intr.z_max + intr.z_clamp_slack) {
    return std::nullopt;
  }
  const double z = std::clamp(z_raw, intr.z_min, intr.z_max);
  return Vec3{(u - intr.cx) * z / intr.f, (v - intr.cy) * z / intr.f, z};
}

Mat3 range_noise(double range, const RangeNoiseModel& model) {
  if (range < 0.0) throw std::invalid_argument("range_noise: negative range");
  const double s = model.sigma(range);
  return s * s * Mat3::Identity();
}

namespace {

// Camera frame: +Z forward along the optical axis, +X right, +Y down.
bool in_frustum(const Vec3& p_cam, const CameraIntrinsics& intr, double* u, double* v) {
  if (p_cam.z() < intr.z_min || p_cam.z() > intr.z_max) return false;
  const double uu = intr.f * p_cam.x() / p_cam.z() + intr.cx;
  const double vv = intr.f * p_cam.y() / p_cam.z() + intr.cy;
  if (uu < 0.0 || uu >= intr.width || vv < 0.0 || vv >= intr.height) return false;
  *u = uu;
  *v = vv;
  return true;
}

}  // namespace

std::vector<Detection> synth_detect(const std::vector<Vec3>& targets_world,
                                    const RigidTransform& world_T_camera,
                                    const CameraIntrinsics& intr,
                                    const DetectorModel& model,
                                    Rng& rng) {
  const RigidTransform cam_T_world = world_T_camera.inverse();
  std::vector<Detection> out;

  for (const Vec3& p_world : targets_world) {
    const Vec3 p_cam = cam_T_world.apply(p_world);
    double u = 0.0, v = 0.0;
    if (!in_frustum(p_cam, intr, &u, &v)) continue;
    if (draw_uniform(rng, 0.0, 1.0) > model.p_det) continue;

    Detection det;
    det.u = u;
    det.v = v;
    det.w = model.bbox_size;
    det.h = model.bbox_size;
    det.confidence = draw_uniform(rng, model.conf_lo, model.conf_hi);

    // One detection-level disparity perturbation shared by the patch, plus
    // per-sample spread; the patch median then carries std ~= sigma_d.
    const double d_true = intr.f * intr.baseline / p_cam.z();
    const double d_det = d_true + (model.sigma_d > 0.0 ? draw_normal(rng, 0.0, model.sigma_d) : 0.0);
    det.disparity_patch.reserve(model.patch_size);
    for (int i = 0; i < model.patch_size; ++i) {
      const double jitter = model.sigma_d > 0.0 ? draw_normal(rng, 0.0, model.sigma_d) : 0.0;
      det.disparity_patch.push_back(d_det + jitter);
    }
    out.push_back(std::move(det));
  }

  const int n_fp = draw_poisson(rng, model.lambda_fp);
  for (int i = 0; i < n_fp; ++i) {
    Detection det;
    det.u = draw_uniform(rng, 0.0, intr.width);
    det.v = draw_uniform(rng, 0.0, intr.height);
    det.w = model.bbox_size;
    det.h = model.bbox_size;
    det.confidence = draw_uniform(rng, model.conf_lo, model.conf_hi);
    // Uniform in depth, not disparity: uniform disparity would pile the
    // clutter into a thin shell right in front of the camera.
    const double z_fp = draw_uniform(rng, intr.z_min, intr.z_max);
    const double d_fp =
        std::clamp(intr.f * intr.baseline / z_fp, intr.d_min, intr.d_max);
    det.disparity_patch.assign(model.patch_size, d_fp);
    out.push_back(std::move(det));
  }
  return out;
}

std::vector<Measurement3D> lift_detections(const std::vector<Detection>& detections,
                                           const RigidTransform& world_T_camera,
                                           const CameraIntrinsics& intr,
                                           const RangeNoiseModel& noise,
                                           const DetectorModel& model,
                                           AgentId agent,
                                           double timestamp) {
  std::vector<Measurement3D> out;
  for (const Detection& det : detections) {
    const auto d_hat = median_disparity(det, intr, model.min_support);
    if (!d_hat) continue;
    const auto p_cam = back_project(det.u, det.v, *d_hat, intr);
    if (!p_cam) continue;

    Measurement3D m;
    m.position = world_T_camera.apply(*p_cam);
    m.covariance = range_noise(p_cam->norm(), noise);
    m.source_agent = agent;
    m.timestamp = timestamp;
    out.push_back(m);
  }
  return out;
}

}  // namespace seatrack
