#include "seatrack/nav_ekf.hpp"

#include <stdexcept>

namespace seatrack {

void NavNoiseConfig::validate() const {
  if (!(process_psd.minCoeff() > 0.0)) throw std::invalid_argument("process_psd must be > 0");
  if (!(gps_pos_std > 0.0)) throw std::invalid_argument("gps_pos_std must be > 0");
  if (!(imu_acc_std > 0.0)) throw std::invalid_argument("imu_acc_std must be > 0");
  if (!(maneuver_inflation >= 1.0)) throw std::invalid_argument("maneuver_inflation must be >= 1");
  if (!(maneuver_speed_threshold > 0.0)) throw std::invalid_argument("maneuver_speed_threshold must be > 0");
  if (!(init_pos_var > 0.0 && init_vel_var > 0.0 && init_acc_var > 0.0)) {
    throw std::invalid_argument("init_pos_var, init_vel_var and init_acc_var must be > 0");
  }
}

NavState nav_init(const Vec3& z_gps, const NavNoiseConfig& noise, double timestamp) {
  if (!z_gps.allFinite()) throw std::invalid_argument("nav_init: non-finite GPS fix");
  NavState s;
  s.mean.segment<3>(0) = z_gps;
  s.covariance.block<3, 3>(0, 0) = noise.init_pos_var * Mat3::Identity();
  s.covariance.block<3, 3>(3, 3) = noise.init_vel_var * Mat3::Identity();
  s.covariance.block<3, 3>(6, 6) = noise.init_acc_var * Mat3::Identity();
  s.timestamp = timestamp;
  return s;
}

Mat9 nav_transition(double dt) {
  Mat9 f = Mat9::Identity();
  f.block<3, 3>(0, 3) = dt * Mat3::Identity();
  f.block<3, 3>(0, 6) = 0.5 * dt * dt * Mat3::Identity();
  f.block<3, 3>(3, 6) = dt * Mat3::Identity();
  return f;
}

namespace {

// White-jerk discretization of the CA model, per axis:
//   Q = q * [ dt^5/20  dt^4/8  dt^3/6 ]
//           [ dt^4/8   dt^3/3  dt^2/2 ]
//           [ dt^3/6   dt^2/2  dt     ]
Mat9 process_noise(double dt, const Vec3& psd) {
  const double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt, d5 = d4 * dt;
  Mat3 base;
  base << d5 / 20.0, d4 / 8.0, d3 / 6.0,
          d4 / 8.0,  d3 / 3.0, d2 / 2.0,
          d3 / 6.0,  d2 / 2.0, dt;
  Mat9 q = Mat9::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        q(3 * r + axis, 3 * c + axis) = psd[axis] * base(r, c);
      }
    }
  }
  return q;
}

NavState joseph_update(const NavState& s, const Vec3& z, const Eigen::Matrix<double, 3, 9>& h, double meas_std) {
  if (!z.allFinite()) throw std::invalid_argument("nav_update: non-finite measurement");
  const Mat3 r = meas_std * meas_std * Mat3::Identity();
  const Vec3 innovation = z - h * s.mean;
  const Mat3 innov_cov = h * s.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 9, 3> gain = s.covariance * h.transpose() * innov_cov.llt().solve(Mat3::Identity());

  NavState out = s;
  out.mean = s.mean + gain * innovation;
  const Mat9 ikh = Mat9::Identity() - gain * h;
  out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
  symmetrize(out.covariance);
  return out;
}

}  // namespace

NavState nav_predict(const NavState& s, double dt, const NavNoiseConfig& noise, bool aggressive) {
  if (!(dt > 0.0)) throw std::invalid_argument("nav_predict: dt must be > 0");
  const Mat9 f = nav_transition(dt);
  const double scale = aggressive ? noise.maneuver_inflation : 1.0;

  NavState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose() + scale * process_noise(dt, noise.process_psd);
  symmetrize(out.covariance);
  out.timestamp = s.timestamp + dt;
  return out;
}

NavState nav_update(const NavState& s, const Vec3& z, NavMeasurementKind kind, const NavNoiseConfig& noise) {
  Eigen::Matrix<double, 3, 9> h = Eigen::Matrix<double, 3, 9>::Zero();
  double meas_std = 0.0;
  switch (kind) {
    case NavMeasurementKind::kGpsPosition:
      h.block<3, 3>(0, 0) = Mat3::Identity();
      meas_std = noise.gps_pos_std;
      break;
    case NavMeasurementKind::kImuAcceleration:
      h.block<3, 3>(0, 6) = Mat3::Identity();
      meas_std = noise.imu_acc_std;
      break;
  }
  return joseph_update(s, z, h, meas_std);
}

}  // namespace seatrack
