#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seatrack/mathutil.hpp"
#include "seatrack/percept.hpp"

namespace seatrack {

// Weights of the assignment cost
//   C = -eta * gain + beta * distance - rho * [same primary as before] + gamma * crowding.
struct AllocWeights {
  double eta = 1.0;
  double beta = 0.1;
  double rho = 0.2;
  double gamma = 0.2;
  // Out-of-range surrogate weight; kept for config compatibility. Pairs
  // beyond d_max are dropped from the network instead, so the solver never
  // sees it.
  double kappa = 1000.0;

  void validate() const;
};

struct AllocConfig {
  AllocWeights weights;
  double d_max = 60.0;   // beyond this a pair is infeasible (no edge)
  double r_safe = 2.0;   // crowding radius between UAVs
  int capacity = 2;      // max targets per UAV

  void validate() const;
};

// Expected reduction of logdet of the target covariance if one more
// range-dependent position measurement were folded in.
double info_gain_proxy(const Mat3& covariance, double distance,
                       const RangeNoiseModel& noise);

// Sum over other UAVs of max(0, (r_safe - dist)/r_safe); 0 when everyone is
// at least r_safe away, approaches the number of neighbours as they converge.
double separation_penalty(const Vec3& position, const std::vector<Vec3>& others,
                          double r_safe);

struct CostTerm {
  double cost = 0.0;
  bool feasible = false;
};

CostTerm assignment_cost(const Mat3& target_cov, const Vec3& uav_position,
                         const Vec3& target_position, bool was_primary,
                         double crowding, const AllocWeights& weights,
                         double d_max, const RangeNoiseModel& noise);

// Dense cost table with explicit feasibility flags; infeasible entries carry
// no edge in the flow network.
struct CostMatrix {
  int num_uavs = 0;
  int num_targets = 0;
  std::vector<double> cost;      // row-major [uav][target]
  std::vector<char> feasible;    // same layout
  std::vector<std::uint64_t> target_ids;  // column -> external id
  AllocWeights weights;
  double d_max = 0.0;
  double r_safe = 0.0;

  double& at(int uav, int target) { return cost[uav * num_targets + target]; }
  double at(int uav, int target) const { return cost[uav * num_targets + target]; }
  bool edge(int uav, int target) const {
    return feasible[uav * num_targets + target] != 0;
  }
  void set_edge(int uav, int target, double c) {
    cost[uav * num_targets + target] = c;
    feasible[uav * num_targets + target] = 1;
  }
};

CostMatrix make_cost_matrix(int num_uavs, int num_targets);

struct AllocTargetInput {
  std::uint64_t id = 0;
  Vec3 position = Vec3::Zero();
  Mat3 covariance = Mat3::Identity();
};

CostMatrix build_cost_matrix(const std::vector<Vec3>& uav_positions,
                             const std::vector<std::optional<std::uint64_t>>& prev_primary,
                             const std::vector<AllocTargetInput>& targets,
                             const AllocConfig& cfg,
                             const RangeNoiseModel& noise);

struct UavAssignment {
  std::vector<std::uint64_t> targets;  // sorted by cost, cheapest first
  std::optional<std::uint64_t> primary;
};

struct AssignmentSet {
  std::vector<UavAssignment> per_uav;
  double total_cost = 0.0;
  int flow = 0;  // number of assigned (uav, target) pairs
};

// Min-cost assignment with per-UAV capacity and at most one UAV per target,
// maximising the number of covered targets first. Successive shortest paths;
// deterministic for a given matrix.
AssignmentSet solve_cmcf(const CostMatrix& costs, int capacity);

}  // namespace seatrack
