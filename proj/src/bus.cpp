#include "seatrack/bus.hpp"

#include <bit>
#include <cstring>

namespace seatrack {

namespace {

static_assert(sizeof(double) == 8);
static_assert(std::endian::native == std::endian::little,
              "wire format assumes a little-endian host");

void put_u64(std::uint8_t* dst, std::uint64_t v) { std::memcpy(dst, &v, 8); }
void put_f64(std::uint8_t* dst, double v) { std::memcpy(dst, &v, 8); }
std::uint64_t get_u64(const std::uint8_t* src) {
  std::uint64_t v;
  std::memcpy(&v, src, 8);
  return v;
}
double get_f64(const std::uint8_t* src) {
  double v;
  std::memcpy(&v, src, 8);
  return v;
}

}  // namespace

std::array<std::uint8_t, kBusMessageSize> encode_message(const BusMessage& m) {
  std::array<std::uint8_t, kBusMessageSize> buf{};
  put_u64(buf.data(), m.sender);
  put_u64(buf.data() + 8, m.track);
  put_f64(buf.data() + 16, m.timestamp);
  for (int i = 0; i < 3; ++i) put_f64(buf.data() + 24 + 8 * i, m.mean[i]);
  for (int i = 0; i < 6; ++i) put_f64(buf.data() + 48 + 8 * i, m.cov_upper[i]);
  return buf;
}

BusMessage decode_message(const std::array<std::uint8_t, kBusMessageSize>& buf) {
  BusMessage m;
  m.sender = get_u64(buf.data());
  m.track = get_u64(buf.data() + 8);
  m.timestamp = get_f64(buf.data() + 16);
  for (int i = 0; i < 3; ++i) m.mean[i] = get_f64(buf.data() + 24 + 8 * i);
  for (int i = 0; i < 6; ++i) m.cov_upper[i] = get_f64(buf.data() + 48 + 8 * i);
  return m;
}

BusMessage message_from_summary(const TrackSummary& s) {
  BusMessage m;
  m.sender = s.agent;
  m.track = s.local_id;
  m.timestamp = s.timestamp;
  for (int i = 0; i < 3; ++i) m.mean[i] = s.mean[i];
  int k = 0;
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) m.cov_upper[k++] = s.covariance(r, c);
  }
  return m;
}

TrackSummary summary_from_message(const BusMessage& m) {
  TrackSummary s;
  s.agent = m.sender;
  s.local_id = m.track;
  s.timestamp = m.timestamp;
  for (int i = 0; i < 3; ++i) s.mean[i] = m.mean[i];
  int k = 0;
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) {
      s.covariance(r, c) = m.cov_upper[k];
      s.covariance(c, r) = m.cov_upper[k];
      ++k;
    }
  }
  return s;
}

std::vector<TrackSummary> broadcast_round(
    const std::vector<std::vector<TrackSummary>>& per_agent,
    double drop_prob, Rng& rng, BusStats* stats) {
  std::vector<TrackSummary> delivered;
  for (const auto& summaries : per_agent) {
    for (const TrackSummary& s : summaries) {
      const auto wire = encode_message(message_from_summary(s));
      if (stats) {
        stats->sent += 1;
        stats->bytes_sent += wire.size();
        stats->per_link_sent[s.agent] += 1;
      }
      const bool drop = drop_prob > 0.0 && draw_uniform(rng, 0.0, 1.0) < drop_prob;
      if (drop) {
        if (stats) stats->dropped += 1;
        continue;
      }
      if (stats) stats->delivered += 1;
      delivered.push_back(summary_from_message(decode_message(wire)));
    }
  }
  return delivered;
}

}  // namespace seatrack
