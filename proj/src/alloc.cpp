#include "seatrack/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace seatrack {

void AllocWeights::validate() const {
  if (!(eta >= 0.0) || !(beta >= 0.0) || !(rho >= 0.0) || !(gamma >= 0.0) ||
      !(kappa >= 0.0)) {
    throw std::invalid_argument("eta, beta, rho, gamma and kappa must be non-negative");
  }
}

void AllocConfig::validate() const {
  weights.validate();
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
  if (!(r_safe > 0.0)) throw std::invalid_argument("r_safe must be positive");
  if (capacity < 0) throw std::invalid_argument("capacity must be non-negative");
}

double info_gain_proxy(const Mat3& covariance, double distance,
                       const RangeNoiseModel& noise) {
  const Mat3 r = range_noise(distance, noise);
  const Mat3 id = Mat3::Identity();
  const Mat3 info_p = covariance.llt().solve(id);
  const Mat3 info_r = r.llt().solve(id);
  const double before = logdet_spd(covariance);
  Mat3 post = (info_p + info_r).llt().solve(id);
  symmetrize(post);
  const double after = logdet_spd(post);
  return std::max(0.0, before - after);
}

double separation_penalty(const Vec3& position, const std::vector<Vec3>& others,
                          double r_safe) {
  if (!(r_safe > 0.0)) throw std::invalid_argument("r_safe must be positive");
  double phi = 0.0;
  for (const Vec3& other : others) {
    const double dist = (position - other).norm();
    phi += std::max(0.0, (r_safe - dist) / r_safe);
  }
  return phi;
}

CostTerm assignment_cost(const Mat3& target_cov, const Vec3& uav_position,
                         const Vec3& target_position, bool was_primary,
                         double crowding, const AllocWeights& weights,
                         double d_max, const RangeNoiseModel& noise) {
  CostTerm out;
  const double d = (uav_position - target_position).norm();
  if (d > d_max) return out;  // infeasible, cost meaningless
  const double gain = info_gain_proxy(target_cov, d, noise);
  out.cost = -weights.eta * gain + weights.beta * d -
             weights.rho * (was_primary ? 1.0 : 0.0) + weights.gamma * crowding;
  out.feasible = true;
  return out;
}

CostMatrix make_cost_matrix(int num_uavs, int num_targets) {
  if (num_uavs < 0 || num_targets < 0) {
    throw std::invalid_argument("cost matrix dimensions must be non-negative");
  }
  CostMatrix m;
  m.num_uavs = num_uavs;
  m.num_targets = num_targets;
  m.cost.assign(static_cast<std::size_t>(num_uavs) * num_targets, 0.0);
  m.feasible.assign(static_cast<std::size_t>(num_uavs) * num_targets, 0);
  m.target_ids.resize(num_targets);
  for (int j = 0; j < num_targets; ++j) m.target_ids[j] = static_cast<std::uint64_t>(j);
  return m;
}

CostMatrix build_cost_matrix(const std::vector<Vec3>& uav_positions,
                             const std::vector<std::optional<std::uint64_t>>& prev_primary,
                             const std::vector<AllocTargetInput>& targets,
                             const AllocConfig& cfg,
                             const RangeNoiseModel& noise) {
  cfg.validate();
  if (prev_primary.size() != uav_positions.size()) {
    throw std::invalid_argument("prev_primary size must match uav_positions");
  }
  const int m = static_cast<int>(uav_positions.size());
  const int n = static_cast<int>(targets.size());
  CostMatrix out = make_cost_matrix(m, n);
  out.weights = cfg.weights;
  out.d_max = cfg.d_max;
  out.r_safe = cfg.r_safe;
  for (int j = 0; j < n; ++j) out.target_ids[j] = targets[j].id;

  for (int u = 0; u < m; ++u) {
    std::vector<Vec3> others;
    others.reserve(uav_positions.size() - 1);
    for (int v = 0; v < m; ++v) {
      if (v != u) others.push_back(uav_positions[v]);
    }
    const double crowding = separation_penalty(uav_positions[u], others, cfg.r_safe);
    for (int j = 0; j < n; ++j) {
      const bool was_primary =
          prev_primary[u].has_value() && *prev_primary[u] == targets[j].id;
      const CostTerm term =
          assignment_cost(targets[j].covariance, uav_positions[u],
                          targets[j].position, was_primary, crowding,
                          cfg.weights, cfg.d_max, noise);
      if (term.feasible) out.set_edge(u, j, term.cost);
    }
  }
  return out;
}

namespace {

struct Arc {
  int to;
  int cap;
  double cost;
  int rev;
};

void add_arc(std::vector<std::vector<Arc>>& g, int u, int v, int cap, double cost) {
  g[u].push_back({v, cap, cost, static_cast<int>(g[v].size())});
  g[v].push_back({u, 0, -cost, static_cast<int>(g[u].size()) - 1});
}

}  // namespace

AssignmentSet solve_cmcf(const CostMatrix& costs, int capacity) {
  if (capacity < 0) throw std::invalid_argument("capacity must be non-negative");
  const int m = costs.num_uavs;
  const int n = costs.num_targets;
  AssignmentSet out;
  out.per_uav.resize(m);
  if (m == 0 || n == 0 || capacity == 0) return out;

  const int source = 0;
  const int sink = 1 + m + n;
  const int nodes = sink + 1;
  const auto uav_node = [](int u) { return 1 + u; };
  const auto target_node = [m](int j) { return 1 + m + j; };

  std::vector<std::vector<Arc>> g(nodes);
  for (int u = 0; u < m; ++u) add_arc(g, source, uav_node(u), capacity, 0.0);
  for (int u = 0; u < m; ++u) {
    for (int j = 0; j < n; ++j) {
      if (costs.edge(u, j)) add_arc(g, uav_node(u), target_node(j), 1, costs.at(u, j));
    }
  }
  for (int j = 0; j < n; ++j) add_arc(g, target_node(j), sink, 1, 0.0);

  const double inf = std::numeric_limits<double>::infinity();

  // Edge costs may be negative; one Bellman-Ford pass over the (acyclic)
  // network seeds potentials so Dijkstra on reduced costs stays valid.
  std::vector<double> pi(nodes, inf);
  pi[source] = 0.0;
  for (int round = 0; round < nodes - 1; ++round) {
    bool changed = false;
    for (int u = 0; u < nodes; ++u) {
      if (pi[u] == inf) continue;
      for (const Arc& a : g[u]) {
        if (a.cap > 0 && pi[u] + a.cost < pi[a.to]) {
          pi[a.to] = pi[u] + a.cost;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (double& p : pi) {
    if (p == inf) p = 0.0;  // unreachable, never touched afterwards
  }

  std::vector<double> dist(nodes);
  std::vector<int> prev_node(nodes), prev_arc(nodes);
  while (true) {
    std::fill(dist.begin(), dist.end(), inf);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, source});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (std::size_t k = 0; k < g[u].size(); ++k) {
        const Arc& a = g[u][k];
        if (a.cap <= 0) continue;
        const double nd = d + a.cost + pi[u] - pi[a.to];
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          prev_node[a.to] = u;
          prev_arc[a.to] = static_cast<int>(k);
          heap.push({nd, a.to});
        }
      }
    }
    if (dist[sink] == inf) break;
    for (int v = 0; v < nodes; ++v) {
      if (dist[v] < inf) pi[v] += dist[v];
    }
    int bottleneck = std::numeric_limits<int>::max();
    for (int v = sink; v != source; v = prev_node[v]) {
      bottleneck = std::min(bottleneck, g[prev_node[v]][prev_arc[v]].cap);
    }
    for (int v = sink; v != source; v = prev_node[v]) {
      Arc& a = g[prev_node[v]][prev_arc[v]];
      a.cap -= bottleneck;
      g[a.to][a.rev].cap += bottleneck;
    }
    out.flow += bottleneck;
  }

  // At a UAV node every arc into a target node is a forward edge (reverse
  // edges of uav->target arcs live at the target node), so spent capacity
  // identifies the chosen pairs.
  for (int u = 0; u < m; ++u) {
    std::vector<std::pair<double, std::uint64_t>> picked;
    for (const Arc& a : g[uav_node(u)]) {
      const int j = a.to - target_node(0);
      if (j < 0 || j >= n || a.cap != 0) continue;
      picked.emplace_back(costs.at(u, j), costs.target_ids[j]);
      out.total_cost += costs.at(u, j);
    }
    std::sort(picked.begin(), picked.end());
    for (const auto& [c, id] : picked) out.per_uav[u].targets.push_back(id);
    if (!picked.empty()) out.per_uav[u].primary = picked.front().second;
  }
  return out;
}

}  // namespace seatrack
