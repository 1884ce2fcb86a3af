#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "seatrack/fuse.hpp"
#include "seatrack/mathutil.hpp"

namespace seatrack {

inline constexpr std::size_t kBusMessageSize = 96;

// Fixed little-endian wire record: sender u64, track u64, timestamp f64,
// mean 3xf64, covariance upper triangle 6xf64 in row-major order
// (00, 01, 02, 11, 12, 22).
struct BusMessage {
  std::uint64_t sender = 0;
  std::uint64_t track = 0;
  double timestamp = 0.0;
  std::array<double, 3> mean{};
  std::array<double, 6> cov_upper{};
};

std::array<std::uint8_t, kBusMessageSize> encode_message(const BusMessage& m);
BusMessage decode_message(const std::array<std::uint8_t, kBusMessageSize>& buf);

BusMessage message_from_summary(const TrackSummary& s);
TrackSummary summary_from_message(const BusMessage& m);

struct BusStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t bytes_sent = 0;
  std::map<AgentId, std::uint64_t> per_link_sent;
};

// Serializes every summary, drops each independently with the configured
// probability, and decodes the survivors. Accounting is exact: bytes_sent is
// 96 times the message count regardless of drops.
std::vector<TrackSummary> broadcast_round(
    const std::vector<std::vector<TrackSummary>>& per_agent,
    double drop_prob, Rng& rng, BusStats* stats);

}  // namespace seatrack
