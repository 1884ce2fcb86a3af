#include "seatrack/geom.hpp"

#include <cmath>
#include <stdexcept>

namespace seatrack {

namespace {
constexpr double kOrthoTol = 1e-9;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho_err = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kOrthoTol || std::abs(rotation.determinant() - 1.0) > kOrthoTol) {
    throw std::invalid_argument("RigidTransform: rotation is not orthonormal with det +1");
  }
}

RigidTransform RigidTransform::from_ypr(double yaw, double pitch, double roll, const Vec3& t) {
  return {rot_z(yaw) * rot_y(pitch) * rot_x(roll), t};
}

RigidTransform RigidTransform::inverse() const {
  return {rotation_.transpose(), -(rotation_.transpose() * translation_)};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

std::string world_frame() { return "w"; }
std::string vessel_base_frame() { return "s"; }
std::string vessel_odom_frame() { return "so"; }
std::string odom_frame(AgentId agent) { return "o" + std::to_string(agent); }
std::string body_frame(AgentId agent) { return "b" + std::to_string(agent); }
std::string camera_frame(AgentId agent) { return "c" + std::to_string(agent); }

void FrameTree::set(const std::string& parent, const std::string& child, const RigidTransform& t) {
  edges_[{parent, child}] = t;
}

bool FrameTree::has(const std::string& parent, const std::string& child) const {
  return edges_.count({parent, child}) > 0;
}

const RigidTransform& FrameTree::get(const std::string& parent, const std::string& child) const {
  auto it = edges_.find({parent, child});
  if (it == edges_.end()) {
    throw std::out_of_range("FrameTree: missing transform " + parent + " -> " + child);
  }
  return it->second;
}

RigidTransform FrameTree::camera_to_world_transform(AgentId agent) const {
  const auto& w_T_o = get(world_frame(), odom_frame(agent));
  const auto& o_T_b = get(odom_frame(agent), body_frame(agent));
  const auto& b_T_c = get(body_frame(agent), camera_frame(agent));
  return compose(compose(w_T_o, o_T_b), b_T_c);
}

Vec3 FrameTree::camera_to_world(AgentId agent, const Vec3& p_cam) const {
  return camera_to_world_transform(agent).apply(p_cam);
}

Vec3 FrameTree::world_to_camera(AgentId agent, const Vec3& p_world) const {
  return camera_to_world_transform(agent).inverse().apply(p_world);
}

RigidTransform FrameTree::vessel_base_to_world_transform() const {
  const auto& w_T_so = get(world_frame(), vessel_odom_frame());
  const auto& so_T_s = get(vessel_odom_frame(), vessel_base_frame());
  return compose(w_T_so, so_T_s);
}

Vec3 FrameTree::world_to_vessel_base(const Vec3& p_world) const {
  return vessel_base_to_world_transform().inverse().apply(p_world);
}

}  // namespace seatrack
