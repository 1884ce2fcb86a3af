#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "seatrack/fuse.hpp"

using namespace seatrack;

namespace {

TrackSummary make_summary(AgentId agent, TrackId local, const Vec3& mean, const Mat3& cov) {
  TrackSummary s;
  s.agent = agent;
  s.local_id = local;
  s.timestamp = 0.0;
  s.mean = mean;
  s.covariance = cov;
  return s;
}

Mat3 random_spd(Rng& rng, double ridge = 0.3) {
  Eigen::Matrix3d a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = draw_normal(rng, 0.0, 1.0);
  return a * a.transpose() + ridge * Mat3::Identity();
}

double ci_objective(const Mat3& p1, const Mat3& p2, double w) {
  const Mat3 info = w * p1.inverse() + (1.0 - w) * p2.inverse();
  return -logdet_spd(info);  // logdet of the fused covariance
}

double grid_omega(const Mat3& p1, const Mat3& p2, int points) {
  double best_w = 0.0;
  double best = ci_objective(p1, p2, 0.0);
  for (int i = 1; i < points; ++i) {
    const double w = static_cast<double>(i) / (points - 1);
    const double v = ci_objective(p1, p2, w);
    if (v < best) {
      best = v;
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace

TEST_CASE("weight optimization lands on the tighter input") {
  CHECK(optimize_omega(Mat3::Identity(), 4.0 * Mat3::Identity()) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(optimize_omega(4.0 * Mat3::Identity(), Mat3::Identity()) ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("equal inputs give the midpoint weight") {
  Rng rng = make_rng(19, 1);
  for (int i = 0; i < 10; ++i) {
    const Mat3 p = random_spd(rng);
    CHECK(optimize_omega(p, p) == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("mirrored diagonal inputs balance at one half") {
  const Mat3 p1 = Vec3{1.0, 9.0, 3.0}.asDiagonal();
  const Mat3 p2 = Vec3{9.0, 1.0, 3.0}.asDiagonal();
  CHECK(optimize_omega(p1, p2) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("optimized weight agrees with a dense grid scan") {
  Rng rng = make_rng(19, 2);
  for (int i = 0; i < 50; ++i) {
    const Mat3 p1 = random_spd(rng);
    const Mat3 p2 = random_spd(rng);
    const double w = optimize_omega(p1, p2);
    const double w_grid = grid_omega(p1, p2, 10001);
    CHECK(std::abs(w - w_grid) < 1e-4);
  }
}

TEST_CASE("non positive definite inputs are rejected") {
  Mat3 bad = Mat3::Identity();
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS(optimize_omega(bad, Mat3::Identity()), std::invalid_argument);
}

TEST_CASE("fusing identical estimates changes nothing") {
  Rng rng = make_rng(19, 3);
  const Mat3 p = random_spd(rng);
  const Vec3 mu{1.0, -2.0, 0.5};
  const CiResult r = ci_fuse_pair(make_summary(1, 1, mu, p), make_summary(2, 1, mu, p));
  CHECK((r.mean - mu).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((r.covariance - p).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("a dominant input wins the whole weight") {
  const CiResult r = ci_fuse_pair(make_summary(1, 1, Vec3::Zero(), Mat3::Identity()),
                                  make_summary(2, 1, Vec3::Ones(), 4.0 * Mat3::Identity()));
  CHECK(r.omega == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.mean.cwiseAbs().maxCoeff() < 1e-6);
  CHECK((r.covariance - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("mirrored diagonal fusion has the closed-form covariance") {
  const Mat3 p1 = Vec3{1.0, 9.0, 3.0}.asDiagonal();
  const Mat3 p2 = Vec3{9.0, 1.0, 3.0}.asDiagonal();
  const CiResult r = ci_fuse_pair(make_summary(1, 1, Vec3::Zero(), p1),
                                  make_summary(2, 1, Vec3::Zero(), p2));
  const Mat3 expect = Vec3{1.8, 1.8, 3.0}.asDiagonal();
  CHECK((r.covariance - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pair fusion is symmetric in its arguments") {
  Rng rng = make_rng(19, 4);
  for (int i = 0; i < 20; ++i) {
    const TrackSummary a = make_summary(1, 1, draw_normal_vec3(rng, 2.0), random_spd(rng));
    const TrackSummary b = make_summary(2, 1, draw_normal_vec3(rng, 2.0), random_spd(rng));
    const CiResult ab = ci_fuse_pair(a, b);
    const CiResult ba = ci_fuse_pair(b, a);
    // The weight search is only accurate to where the objective flattens
    // into floating-point noise, so mirrored runs agree to ~1e-7, not 1e-12.
    CHECK((ab.mean - ba.mean).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((ab.covariance - ba.covariance).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(ab.omega == doctest::Approx(1.0 - ba.omega).epsilon(1e-6));
  }
}

TEST_CASE("the mixed covariance stays positive definite across the weight range") {
  Rng rng = make_rng(19, 5);
  for (int i = 0; i < 10; ++i) {
    const Mat3 p1 = random_spd(rng);
    const Mat3 p2 = random_spd(rng);
    for (int j = 0; j <= 20; ++j) {
      const double w = j / 20.0;
      const Mat3 info = w * p1.inverse() + (1.0 - w) * p2.inverse();
      Mat3 cov = info.inverse();
      symmetrize(cov);
      CHECK(is_spd(cov, 1e-7));
    }
  }
}

TEST_CASE("sequential fusion passes singletons through and absorbs duplicates") {
  Rng rng = make_rng(19, 6);
  const Mat3 p = random_spd(rng);
  const Vec3 mu{0.4, 0.4, -1.0};
  const TrackSummary s = make_summary(3, 7, mu, p);

  const CiResult single = ci_fuse_sequential({s});
  CHECK((single.mean - mu).cwiseAbs().maxCoeff() == 0.0);
  CHECK((single.covariance - p).cwiseAbs().maxCoeff() == 0.0);

  const CiResult triple = ci_fuse_sequential(
      {make_summary(1, 1, mu, p), make_summary(2, 1, mu, p), make_summary(3, 1, mu, p)});
  CHECK((triple.mean - mu).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((triple.covariance - p).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(ci_fuse_sequential({}), std::invalid_argument);
}

TEST_CASE("sequential fusion is arrival-order independent and contracts volume") {
  Rng rng = make_rng(19, 7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<TrackSummary> summaries;
    for (int i = 0; i < 4; ++i) {
      summaries.push_back(make_summary(static_cast<AgentId>(4 - i), 1,
                                       draw_normal_vec3(rng, 0.3), random_spd(rng)));
    }
    const CiResult sorted_result = ci_fuse_sequential(summaries);

    std::vector<TrackSummary> shuffled = summaries;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const CiResult shuffled_result = ci_fuse_sequential(shuffled);
    CHECK((sorted_result.mean - shuffled_result.mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((sorted_result.covariance - shuffled_result.covariance).cwiseAbs().maxCoeff() < 1e-9);

    double min_logdet = logdet_spd(summaries[0].covariance);
    for (const auto& s : summaries) min_logdet = std::min(min_logdet, logdet_spd(s.covariance));
    CHECK(logdet_spd(sorted_result.covariance) <= min_logdet + 1e-9);
  }
}

TEST_CASE("independence fusion halves equal covariances and ignores weak inputs") {
  const CiResult equal = naive_fuse_pair(make_summary(1, 1, Vec3::Zero(), 2.0 * Mat3::Identity()),
                                         make_summary(2, 1, Vec3::Zero(), 2.0 * Mat3::Identity()));
  CHECK((equal.covariance - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  const CiResult weak = naive_fuse_pair(make_summary(1, 1, Vec3::Zero(), Mat3::Identity()),
                                        make_summary(2, 1, Vec3::Ones(), 1e6 * Mat3::Identity()));
  CHECK((weak.covariance - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-3);
  CHECK(weak.mean.cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("independence fusion is never looser than the conservative rule") {
  Rng rng = make_rng(19, 8);
  for (int i = 0; i < 30; ++i) {
    const TrackSummary a = make_summary(1, 1, Vec3::Zero(), random_spd(rng));
    const TrackSummary b = make_summary(2, 1, Vec3::Zero(), random_spd(rng));
    CHECK(naive_fuse_pair(a, b).covariance.trace() <=
          ci_fuse_pair(a, b).covariance.trace() + 1e-9);
  }
}

TEST_CASE("nearby summaries cluster together and distant ones split") {
  const auto close = cross_agent_associate(
      {make_summary(1, 1, {0.0, 0.0, 0.0}, Mat3::Identity()),
       make_summary(2, 1, {0.1, 0.0, 0.0}, Mat3::Identity())},
      {}, 11.345);
  REQUIRE(close.size() == 1);
  CHECK(close[0].fused_id == 0);
  CHECK(close[0].members.size() == 2);

  const auto far = cross_agent_associate(
      {make_summary(1, 1, {0.0, 0.0, 0.0}, Mat3::Identity()),
       make_summary(2, 1, {20.0, 0.0, 0.0}, Mat3::Identity())},
      {}, 11.345);
  CHECK(far.size() == 2);

  CHECK(cross_agent_associate({}, {}, 11.345).empty());
}

TEST_CASE("summaries gate onto an existing fused track by id") {
  FusedTrack f;
  f.id = 42;
  f.mean = Vec3{1.0, 1.0, 0.0};
  f.covariance = 0.5 * Mat3::Identity();
  const auto clusters = cross_agent_associate(
      {make_summary(1, 3, {1.1, 1.0, 0.0}, 0.5 * Mat3::Identity())}, {f}, 11.345);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].fused_id == 42);
}

TEST_CASE("the reducer keeps silent tracks and never unsets done") {
  Fuser fuser;
  fuser.round({make_summary(1, 1, {0.0, 0.0, 0.0}, 0.1 * Mat3::Identity())}, 0.5);
  REQUIRE(fuser.tracks().size() == 1);
  const FusedId id = fuser.tracks()[0].id;

  // A far-away summary spawns a second track; the first persists unchanged.
  fuser.round({make_summary(2, 1, {30.0, 0.0, 0.0}, 0.1 * Mat3::Identity())}, 1.0);
  REQUIRE(fuser.tracks().size() == 2);
  CHECK(fuser.tracks()[0].id == id);
  CHECK(fuser.tracks()[0].last_fuse_time == 0.5);

  fuser.mark_done(id);
  CHECK(fuser.active().size() == 1);
  // Fresh evidence near a done track folds into it without clearing done.
  fuser.round({make_summary(1, 5, {0.05, 0.0, 0.0}, 0.1 * Mat3::Identity())}, 1.5);
  REQUIRE(fuser.tracks().size() == 2);
  CHECK(fuser.tracks()[0].done);
  CHECK(fuser.tracks()[0].last_fuse_time == 1.5);
  CHECK(fuser.contraction_violations() == 0);
}
