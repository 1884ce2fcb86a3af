#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "seatrack/view.hpp"

using namespace seatrack;

namespace {

RingParams small_ring() {
  RingParams r;
  r.radius = 4.0;
  r.altitude = 6.0;
  r.count = 4;
  return r;
}

}  // namespace

TEST_CASE("ring poses sit at evenly spaced angles around the target") {
  const auto ring = ring_candidates(Vec3::Zero(), small_ring());
  REQUIRE(ring.size() == 4);
  const Vec3 expect[4] = {{4.0, 0.0, 6.0}, {0.0, 4.0, 6.0}, {-4.0, 0.0, 6.0}, {0.0, -4.0, 6.0}};
  for (int i = 0; i < 4; ++i) {
    CHECK((ring[i].pose - expect[i]).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(ring[i].psi == doctest::Approx(2.0 * M_PI * i / 4.0));
  }

  RingParams single = small_ring();
  single.count = 1;
  const auto one = ring_candidates({1.0, 2.0, 0.0}, single);
  REQUIRE(one.size() == 1);
  CHECK((one[0].pose - Vec3{5.0, 2.0, 6.0}).cwiseAbs().maxCoeff() < 1e-9);

  RingParams bad = small_ring();
  bad.count = 0;
  CHECK_THROWS_AS(ring_candidates(Vec3::Zero(), bad), std::invalid_argument);
}

TEST_CASE("every ring pose has the same range to the target") {
  RingParams params;
  params.radius = 3.0;
  params.altitude = 5.0;
  params.count = 8;
  const Vec3 target{7.0, -2.0, 0.5};
  const double expect = std::sqrt(3.0 * 3.0 + 5.0 * 5.0);
  for (const auto& c : ring_candidates(target, params)) {
    CHECK((c.pose - target).norm() == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("viewpoint gain reproduces the closed form and saturates") {
  RangeNoiseModel unit{1.0, 0.0};  // R = I at every range
  const Vec3 target = Vec3::Zero();
  const Vec3 pose{4.0, 0.0, 6.0};
  CHECK(viewpoint_gain(4.0 * Mat3::Identity(), pose, target, unit) ==
        doctest::Approx(3.0 * std::log(5.0)).epsilon(1e-9));

  // Equal ranges on a ring mean equal gains under the isotropic model.
  const auto ring = ring_candidates(target, small_ring());
  const double g0 = viewpoint_gain(4.0 * Mat3::Identity(), ring[0].pose, target, unit);
  for (const auto& c : ring) {
    CHECK(viewpoint_gain(4.0 * Mat3::Identity(), c.pose, target, unit) ==
          doctest::Approx(g0).epsilon(1e-12));
  }

  CHECK(viewpoint_gain(1e-9 * Mat3::Identity(), pose, target, unit) <= 1e-6);
}

TEST_CASE("hover selection picks the nearest pose when gains tie") {
  RangeNoiseModel unit{1.0, 0.0};
  HoverConstraints none;
  const auto sel = select_hover({10.0, 0.0, 6.0}, Vec3::Zero(), 4.0 * Mat3::Identity(), none,
                                small_ring(), unit, 0.1);
  REQUIRE(sel.has_value());
  CHECK((sel->chosen.pose - Vec3{4.0, 0.0, 6.0}).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(sel->ring.size() == 4);
}

TEST_CASE("hover selection returns nothing when every pose is blocked") {
  RangeNoiseModel unit{1.0, 0.0};
  HoverConstraints blocked;
  blocked.r_safe = 2.0;
  for (const auto& c : ring_candidates(Vec3::Zero(), small_ring())) {
    blocked.blocked.push_back(c.pose);
  }
  const auto sel = select_hover({10.0, 0.0, 6.0}, Vec3::Zero(), 4.0 * Mat3::Identity(), blocked,
                                small_ring(), unit, 0.1);
  CHECK_FALSE(sel.has_value());
}

TEST_CASE("standing on a candidate makes it unbeatable") {
  RangeNoiseModel unit{1.0, 0.0};
  HoverConstraints none;
  const Vec3 at_candidate{0.0, 4.0, 6.0};
  const auto sel = select_hover(at_candidate, Vec3::Zero(), 4.0 * Mat3::Identity(), none,
                                small_ring(), unit, 0.1);
  REQUIRE(sel.has_value());
  CHECK((sel->chosen.pose - at_candidate).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("equidistant ties resolve to the smallest ring angle") {
  RangeNoiseModel unit{1.0, 0.0};
  HoverConstraints none;
  // Directly above the target: every candidate is equally far.
  const auto sel = select_hover({0.0, 0.0, 20.0}, Vec3::Zero(), 4.0 * Mat3::Identity(), none,
                                small_ring(), unit, 0.1);
  REQUIRE(sel.has_value());
  CHECK(sel->chosen.psi == doctest::Approx(0.0));
}

TEST_CASE("selection equals exhaustive enumeration over the ring") {
  RangeNoiseModel noise{0.5, 0.05};
  Rng rng = make_rng(29, 1);
  RingParams params;
  params.radius = 3.0;
  params.altitude = 5.0;
  params.count = 8;
  for (int trial = 0; trial < 40; ++trial) {
    const Vec3 target = draw_normal_vec3(rng, 5.0);
    const Vec3 uav = draw_normal_vec3(rng, 8.0);
    HoverConstraints cons;
    cons.r_safe = 2.0;
    for (int i = 0; i < 2; ++i) cons.blocked.push_back(target + draw_normal_vec3(rng, 4.0));
    const Mat3 cov = draw_uniform(rng, 0.5, 6.0) * Mat3::Identity();

    const auto sel = select_hover(uav, target, cov, cons, params, noise, 0.1);

    // Enumerate by hand.
    double best_score = -1.0;
    const HoverCandidate* best = nullptr;
    std::vector<HoverCandidate> ring = ring_candidates(target, params);
    for (auto& c : ring) {
      bool ok = true;
      for (const auto& b : cons.blocked) {
        if ((c.pose - b).norm() < cons.r_safe) ok = false;
      }
      if (!ok) continue;
      const double gain = viewpoint_gain(cov, c.pose, target, noise);
      const double score = gain / ((uav - c.pose).norm() + 0.1);
      if (score > best_score + 1e-12) {
        best_score = score;
        best = &c;
      }
    }
    if (best == nullptr) {
      CHECK_FALSE(sel.has_value());
    } else {
      REQUIRE(sel.has_value());
      CHECK(sel->chosen.psi == doctest::Approx(best->psi));
    }
  }
}

TEST_CASE("termination triggers on tight covariance or worthless gains") {
  const Mat3 tight = 0.01 * Mat3::Identity();   // logdet ~ -13.8
  const Mat3 loose = 4.0 * Mat3::Identity();
  CHECK(check_termination(tight, {5.0}, -6.0, 0.1));
  CHECK_FALSE(check_termination(loose, {5.0}, -6.0, 0.1));
  CHECK(check_termination(loose, {0.05, 0.01}, -6.0, 0.1));
  // No feasible viewpoint anywhere counts as zero achievable gain.
  CHECK(check_termination(loose, {}, -6.0, 0.1));
}

TEST_CASE("the mode machine follows assignments and hands off finished targets") {
  RangeNoiseModel unit{1.0, 0.0};
  RingParams params = small_ring();
  ModeState state;  // starts in surveillance

  ModeInputs in;
  in.assigned = {5};
  in.primary = 5;
  in.primary_position = Vec3::Zero();
  in.primary_covariance = 4.0 * Mat3::Identity();
  in.uav_position = Vec3{10.0, 0.0, 6.0};

  const ModeOutcome tracking = mode_step(state, in, params, unit, 0.1);
  CHECK(tracking.state.mode == Mode::kTracking);
  REQUIRE(tracking.state.active_target.has_value());
  CHECK(*tracking.state.active_target == 5);
  REQUIRE(tracking.state.hover_pose.has_value());
  CHECK(tracking.events.empty());

  // Same assignment, fresher estimate: stays tracking, hover refreshed.
  ModeInputs refresh = in;
  refresh.primary_position = Vec3{1.0, 0.0, 0.0};
  const ModeOutcome stay = mode_step(tracking.state, refresh, params, unit, 0.1);
  CHECK(stay.state.mode == Mode::kTracking);
  CHECK((*stay.state.hover_pose - *tracking.state.hover_pose).norm() > 0.5);

  // Active target finished: back to surveillance with a handoff event.
  ModeInputs done = in;
  done.active_done = true;
  done.assigned.clear();
  done.primary.reset();
  const ModeOutcome handoff = mode_step(stay.state, done, params, unit, 0.1);
  CHECK(handoff.state.mode == Mode::kSurveillance);
  CHECK_FALSE(handoff.state.active_target.has_value());
  CHECK_FALSE(handoff.state.hover_pose.has_value());
  REQUIRE(handoff.events.size() == 1);
  CHECK(handoff.events[0].target == 5);
  CHECK(handoff.events[0].handoff);
}

TEST_CASE("without an assignment the machine stays in surveillance") {
  RangeNoiseModel unit{1.0, 0.0};
  ModeState state;
  ModeInputs in;
  in.uav_position = Vec3::Zero();
  const ModeOutcome out = mode_step(state, in, small_ring(), unit, 0.1);
  CHECK(out.state.mode == Mode::kSurveillance);
  CHECK_FALSE(out.state.active_target.has_value());
  CHECK_FALSE(out.state.hover_pose.has_value());
  CHECK(out.events.empty());
}

TEST_CASE("tracking mode always carries an active target") {
  RangeNoiseModel unit{1.0, 0.0};
  ModeState state;
  ModeInputs in;
  in.assigned = {3};
  in.primary = 3;
  in.primary_position = Vec3::Zero();
  in.primary_covariance = Mat3::Identity();
  in.uav_position = Vec3{5.0, 0.0, 6.0};
  ModeOutcome out = mode_step(state, in, small_ring(), unit, 0.1);
  for (int i = 0; i < 5; ++i) {
    if (out.state.mode == Mode::kTracking) {
      CHECK(out.state.active_target.has_value());
    } else {
      CHECK_FALSE(out.state.hover_pose.has_value());
    }
    out = mode_step(out.state, in, small_ring(), unit, 0.1);
  }
}
