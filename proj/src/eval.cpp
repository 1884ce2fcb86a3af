#include "seatrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <stdexcept>

namespace seatrack {

namespace {

using TruthId = std::uint64_t;
using EstId = std::uint64_t;

// Exact maximum-weight one-to-one mapping by recursion over truths. Each
// truth has few candidate identities in practice, so the branch factor is
// small even though the worst case is exponential.
double best_mapping(const std::vector<std::vector<std::pair<std::size_t, double>>>& cands,
                    std::size_t i, std::vector<char>& used) {
  if (i == cands.size()) return 0.0;
  double best = best_mapping(cands, i + 1, used);
  for (const auto& [j, w] : cands[i]) {
    if (used[j]) continue;
    used[j] = 1;
    best = std::max(best, w + best_mapping(cands, i + 1, used));
    used[j] = 0;
  }
  return best;
}

}  // namespace

FrameMatching match_frames(const RunLog& log, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
  std::map<std::int64_t, const TruthRecord*> truth_by_k;
  for (const TruthRecord& tr : log.truth) truth_by_k[tr.k] = &tr;

  FrameMatching fm;
  fm.radius = radius;
  for (const FusedRecord& fr : log.fused) {
    const auto it = truth_by_k.find(fr.k);
    if (it == truth_by_k.end()) {
      throw RunLogError("fused record at tick " + std::to_string(fr.k) +
                        " has no truth record");
    }
    const TruthRecord& truth = *it->second;

    MatchFrame frame;
    frame.k = fr.k;
    frame.t = fr.t;

    struct Cand {
      double d;
      TruthId truth;
      EstId track;
      std::size_t ti, ei;
    };
    std::vector<Cand> cands;
    for (std::size_t ti = 0; ti < truth.containers.size(); ++ti) {
      for (std::size_t ei = 0; ei < fr.tracks.size(); ++ei) {
        const double d = (truth.containers[ti].position - fr.tracks[ei].position).norm();
        if (d <= radius) {
          cands.push_back({d, truth.containers[ti].id, fr.tracks[ei].id, ti, ei});
          frame.gated_pairs.push_back({truth.containers[ti].id, fr.tracks[ei].id, d});
        }
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.d != b.d) return a.d < b.d;
      if (a.truth != b.truth) return a.truth < b.truth;
      return a.track < b.track;
    });
    std::vector<char> truth_used(truth.containers.size(), 0);
    std::vector<char> est_used(fr.tracks.size(), 0);
    for (const Cand& c : cands) {
      if (truth_used[c.ti] || est_used[c.ei]) continue;
      truth_used[c.ti] = est_used[c.ei] = 1;
      frame.matches.push_back({c.truth, c.track, c.d});
    }
    for (std::size_t ti = 0; ti < truth.containers.size(); ++ti) {
      if (!truth_used[ti]) frame.missed.push_back(truth.containers[ti].id);
    }
    for (std::size_t ei = 0; ei < fr.tracks.size(); ++ei) {
      if (!est_used[ei]) frame.false_tracks.push_back(fr.tracks[ei].id);
    }
    fm.frames.push_back(std::move(frame));
  }
  return fm;
}

IdentityMetrics identity_metrics(const FrameMatching& fm) {
  IdentityMetrics out;

  std::map<TruthId, EstId> last_id;
  std::map<TruthId, bool> in_gap;
  std::map<TruthId, std::uint64_t> len_truth;
  std::map<EstId, std::uint64_t> len_track;
  std::map<std::pair<TruthId, EstId>, std::uint64_t> weight;

  for (const MatchFrame& frame : fm.frames) {
    for (const FrameMatch& m : frame.matches) {
      const auto it = last_id.find(m.truth);
      if (it != last_id.end()) {
        if (it->second != m.track) ++out.idsw;
        if (in_gap[m.truth]) ++out.frag;
      }
      last_id[m.truth] = m.track;
      in_gap[m.truth] = false;
      ++len_truth[m.truth];
      ++len_track[m.track];
    }
    for (const TruthId id : frame.missed) {
      ++len_truth[id];
      if (last_id.count(id)) in_gap[id] = true;
    }
    for (const EstId id : frame.false_tracks) ++len_track[id];
    for (const FrameMatch& p : frame.gated_pairs) ++weight[{p.truth, p.track}];
  }

  std::vector<EstId> track_ids;
  for (const auto& [id, len] : len_track) track_ids.push_back(id);
  std::map<EstId, std::size_t> track_index;
  for (std::size_t i = 0; i < track_ids.size(); ++i) track_index[track_ids[i]] = i;

  std::vector<std::vector<std::pair<std::size_t, double>>> cands;
  for (const auto& [tid, len] : len_truth) {
    std::vector<std::pair<std::size_t, double>> row;
    for (const auto& [key, w] : weight) {
      if (key.first == tid && w > 0) row.push_back({track_index.at(key.second), double(w)});
    }
    cands.push_back(std::move(row));
  }
  std::vector<char> used(track_ids.size(), 0);
  const double idtp = best_mapping(cands, 0, used);

  double denom = 0.0;
  for (const auto& [id, len] : len_truth) denom += double(len);
  for (const auto& [id, len] : len_track) denom += double(len);
  out.idf1 = denom == 0.0 ? 1.0 : 2.0 * idtp / denom;
  return out;
}

std::optional<ErrorStats> error_stats(const FrameMatching& fm) {
  std::vector<double> errs;
  for (const MatchFrame& frame : fm.frames) {
    for (const FrameMatch& m : frame.matches) errs.push_back(m.error);
  }
  if (errs.empty()) return std::nullopt;
  std::sort(errs.begin(), errs.end());
  const std::size_t n = errs.size();

  ErrorStats s;
  s.count = n;
  s.med = n % 2 == 1 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
  double sq = 0.0;
  for (const double e : errs) sq += e * e;
  s.rmse = std::sqrt(sq / double(n));
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * double(n) - 1e-9));
  s.p95 = errs[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

double pruning_efficiency(const TrackCounters& c) {
  if (c.pruned > c.raw) throw std::invalid_argument("pruned must not exceed raw");
  if (c.raw == 0) return 0.0;
  return double(c.pruned) / double(c.raw);
}

MetricsReport compute_metrics(const RunLog& log, double radius) {
  MetricsReport r;
  r.radius = radius;
  const FrameMatching fm = match_frames(log, radius);
  r.identity = identity_metrics(fm);
  r.errors = error_stats(fm);

  double logdet_sum = 0.0;
  std::uint64_t logdet_n = 0;
  for (const FusedRecord& fr : log.fused) {
    for (const FusedSnap& s : fr.tracks) {
      logdet_sum += s.logdet;
      ++logdet_n;
    }
  }
  if (logdet_n > 0) r.mean_logdet = logdet_sum / double(logdet_n);

  for (const CounterSnap& c : log.summary.final_counters) {
    TrackCounters tc;
    tc.raw = c.raw;
    tc.pruned = c.pruned;
    r.pruning.push_back({c.id, c.raw, c.pruned, pruning_efficiency(tc)});
  }
  if (log.summary.duration > 0.0) {
    r.bytes_per_s = double(log.summary.bus.bytes_sent) / log.summary.duration;
  }
  return r;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["radius"] = report.radius;
  j["idf1"] = report.identity.idf1;
  j["idsw"] = report.identity.idsw;
  j["frag"] = report.identity.frag;
  if (report.errors) {
    j["errors"] = {{"median", report.errors->med},
                   {"rmse", report.errors->rmse},
                   {"p95", report.errors->p95},
                   {"matches", report.errors->count}};
  } else {
    j["errors"] = nullptr;
  }
  if (report.mean_logdet) {
    j["mean_logdet"] = *report.mean_logdet;
  } else {
    j["mean_logdet"] = nullptr;
  }
  j["pruning"] = nlohmann::json::array();
  for (const AgentPruning& p : report.pruning) {
    j["pruning"].push_back({{"agent", p.agent},
                            {"raw", p.raw},
                            {"pruned", p.pruned},
                            {"efficiency", p.efficiency}});
  }
  j["bytes_per_s"] = report.bytes_per_s;
  return j;
}

void write_report_files(const RunLog& log, const MetricsReport& report,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw std::runtime_error("cannot open report.json for writing");
    out << report_to_json(report).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "logdet_traces.csv");
    out << std::setprecision(17) << "t,track,logdet\n";
    for (const FusedRecord& fr : log.fused) {
      for (const FusedSnap& s : fr.tracks) {
        out << fr.t << "," << s.id << "," << s.logdet << "\n";
      }
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "assignment_fractions.csv");
    out << std::setprecision(17) << "uav,target,assigned_fraction,primary_fraction\n";
    std::map<std::pair<AgentId, std::uint64_t>, std::pair<std::uint64_t, std::uint64_t>> counts;
    for (const AssignRecord& ar : log.assigns) {
      for (const AssignSnap& snap : ar.uavs) {
        for (const std::uint64_t target : snap.targets) {
          auto& c = counts[{snap.id, target}];
          ++c.first;
          if (snap.primary && *snap.primary == target) ++c.second;
        }
      }
    }
    const double cycles = double(log.assigns.size());
    for (const auto& [key, c] : counts) {
      out << key.first << "," << key.second << "," << double(c.first) / cycles << ","
          << double(c.second) / cycles << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "pruning.csv");
    out << std::setprecision(17) << "t,agent,raw,pruned,efficiency\n";
    for (const CountersRecord& cr : log.counters) {
      for (const CounterSnap& c : cr.agents) {
        TrackCounters tc;
        tc.raw = c.raw;
        tc.pruned = c.pruned;
        out << cr.t << "," << c.id << "," << c.raw << "," << c.pruned << ","
            << pruning_efficiency(tc) << "\n";
      }
    }
  }
}

}  // namespace seatrack
