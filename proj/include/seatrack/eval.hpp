#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seatrack/mot.hpp"
#include "seatrack/runlog.hpp"

namespace seatrack {

struct FrameMatch {
  std::uint64_t truth = 0;
  std::uint64_t track = 0;
  double error = 0.0;
};

struct MatchFrame {
  std::int64_t k = 0;
  double t = 0.0;
  std::vector<FrameMatch> matches;
  std::vector<std::uint64_t> missed;        // truth ids left unmatched
  std::vector<std::uint64_t> false_tracks;  // track ids left unmatched
  // Every truth/track pair inside the radius, matched or not. Identity
  // scoring needs the full co-presence table, not just the chosen pairs.
  std::vector<FrameMatch> gated_pairs;
};

struct FrameMatching {
  double radius = 5.0;
  std::vector<MatchFrame> frames;
};

struct IdentityMetrics {
  double idf1 = 1.0;
  std::uint64_t idsw = 0;
  std::uint64_t frag = 0;
};

struct ErrorStats {
  double med = 0.0;
  double rmse = 0.0;
  double p95 = 0.0;
  std::size_t count = 0;
};

struct AgentPruning {
  AgentId agent = 0;
  std::uint64_t raw = 0;
  std::uint64_t pruned = 0;
  double efficiency = 0.0;
};

struct MetricsReport {
  double radius = 5.0;
  IdentityMetrics identity;
  std::optional<ErrorStats> errors;  // empty when no matches at all
  std::optional<double> mean_logdet;
  std::vector<AgentPruning> pruning;
  double bytes_per_s = 0.0;
};

// Joins fused-track records against truth records tick by tick and matches
// greedily by ascending distance, one-to-one, within the radius.
FrameMatching match_frames(const RunLog& log, double radius);

// IDF1 over the optimal global truth-to-identity mapping, plus per-truth
// identity-switch and fragmentation counts.
IdentityMetrics identity_metrics(const FrameMatching& fm);

// Median, root-mean-square, and nearest-rank 95th percentile of the pooled
// match errors. Empty when there are no matches.
std::optional<ErrorStats> error_stats(const FrameMatching& fm);

// Fraction of raw association candidates rejected by gating; 0 when raw = 0.
double pruning_efficiency(const TrackCounters& c);

MetricsReport compute_metrics(const RunLog& log, double radius = 5.0);

nlohmann::json report_to_json(const MetricsReport& report);

// Writes report.json plus CSV series (logdet traces, assignment fractions,
// pruning curves) into out_dir.
void write_report_files(const RunLog& log, const MetricsReport& report,
                        const std::string& out_dir);

}  // namespace seatrack
