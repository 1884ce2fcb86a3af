#pragma once

#include <map>
#include <string>
#include <utility>

#include "seatrack/mathutil.hpp"

namespace seatrack {

/// Rigid body transform: p_parent = rotation * p_child + translation.
/// The rotation is validated at construction (orthonormal, det +1).
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// ZYX Euler convention: R = Rz(yaw) * Ry(pitch) * Rx(roll), angles in radians.
  static RigidTransform from_ypr(double yaw, double pitch, double roll, const Vec3& t = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// compose(a, b) maps coordinates through b then a: result.apply(p) == a.apply(b.apply(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

using AgentId = std::uint64_t;

std::string world_frame();
std::string vessel_base_frame();
std::string vessel_odom_frame();
std::string odom_frame(AgentId agent);
std::string body_frame(AgentId agent);
std::string camera_frame(AgentId agent);

/// Tree of parent->child transforms over the mission frames. Static extrinsics
/// are loaded once; the world->odometry links are rewritten each tick by the
/// localization filters.
class FrameTree {
 public:
  void set(const std::string& parent, const std::string& child, const RigidTransform& t);
  bool has(const std::string& parent, const std::string& child) const;
  /// Throws std::out_of_range naming the missing link.
  const RigidTransform& get(const std::string& parent, const std::string& child) const;

  /// Chain w -> o_j -> b_j -> c_j for one agent.
  RigidTransform camera_to_world_transform(AgentId agent) const;
  Vec3 camera_to_world(AgentId agent, const Vec3& p_cam) const;
  Vec3 world_to_camera(AgentId agent, const Vec3& p_world) const;

  /// w_T_s = w_T_so * so_T_s for the surface vessel.
  RigidTransform vessel_base_to_world_transform() const;
  Vec3 world_to_vessel_base(const Vec3& p_world) const;

 private:
  std::map<std::pair<std::string, std::string>, RigidTransform> edges_;
};

}  // namespace seatrack
