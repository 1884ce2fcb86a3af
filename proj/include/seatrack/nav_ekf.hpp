#pragma once

#include "seatrack/mathutil.hpp"

namespace seatrack {

/// 9-state localization estimate: [position, velocity, acceleration].
struct NavState {
  Vec9 mean = Vec9::Zero();
  Mat9 covariance = Mat9::Zero();
  double timestamp = 0.0;

  Vec3 position() const { return mean.segment<3>(0); }
  Vec3 velocity() const { return mean.segment<3>(3); }
  Vec3 acceleration() const { return mean.segment<3>(6); }
  Mat3 position_cov() const { return covariance.block<3, 3>(0, 0); }
};

struct NavNoiseConfig {
  /// Continuous white-jerk PSD per axis (m^2/s^5).
  Vec3 process_psd = Vec3::Constant(0.05);
  double gps_pos_std = 1.0;   // m
  double imu_acc_std = 0.1;   // m/s^2
  /// Process noise multiplier applied on ticks flagged as aggressive maneuvers.
  double maneuver_inflation = 1.0;
  /// Commanded-speed change (m/s per tick) above which a tick counts as an
  /// aggressive maneuver.
  double maneuver_speed_threshold = 1.0;
  double init_pos_var = 100.0;
  double init_vel_var = 25.0;
  double init_acc_var = 25.0;

  void validate() const;
};

enum class NavMeasurementKind { kGpsPosition, kImuAcceleration };

/// Initialize from the first valid GPS fix: zero velocity/acceleration,
/// configured large diagonal covariance.
NavState nav_init(const Vec3& z_gps, const NavNoiseConfig& noise, double timestamp = 0.0);

/// Constant-acceleration prediction over dt. Set `aggressive` on ticks where
/// the commanded speed change exceeds the maneuver threshold; it scales the
/// process noise by the configured inflation factor for that step.
NavState nav_predict(const NavState& s, double dt, const NavNoiseConfig& noise, bool aggressive = false);

/// Linear Kalman update with H selecting the position rows (GPS) or the
/// acceleration rows (IMU, gravity already compensated upstream).
NavState nav_update(const NavState& s, const Vec3& z, NavMeasurementKind kind, const NavNoiseConfig& noise);

/// Discrete CA transition for one axis triple ordering [p v a] x3.
Mat9 nav_transition(double dt);

}  // namespace seatrack
