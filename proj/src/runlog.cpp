#include "seatrack/runlog.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace seatrack {

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw RunLogError("bad 3-vector field");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

const char* mode_name(Mode m) {
  return m == Mode::kTracking ? "tracking" : "surveillance";
}

Mode mode_from(const std::string& s) {
  if (s == "tracking") return Mode::kTracking;
  if (s == "surveillance") return Mode::kSurveillance;
  throw RunLogError("unknown mode name: " + s);
}

json bus_stats_json(const BusStats& b) {
  json links = json::object();
  for (const auto& [agent, n] : b.per_link_sent) links[std::to_string(agent)] = n;
  return {{"sent", b.sent},
          {"delivered", b.delivered},
          {"dropped", b.dropped},
          {"bytes_sent", b.bytes_sent},
          {"per_link_sent", std::move(links)}};
}

BusStats bus_stats_from(const json& j) {
  BusStats b;
  b.sent = j.at("sent").get<std::uint64_t>();
  b.delivered = j.at("delivered").get<std::uint64_t>();
  b.dropped = j.at("dropped").get<std::uint64_t>();
  b.bytes_sent = j.at("bytes_sent").get<std::uint64_t>();
  for (const auto& [key, val] : j.at("per_link_sent").items()) {
    b.per_link_sent[std::stoull(key)] = val.get<std::uint64_t>();
  }
  return b;
}

json event_json(const HandoffEvent& e) {
  return {{"k", e.k}, {"t", e.t}, {"uav", e.uav}, {"target", e.target}};
}

json event_json(const DoneEvent& e) {
  return {{"k", e.k}, {"t", e.t}, {"target", e.target}};
}

struct Line {
  std::int64_t k;
  int order;  // stream order within one tick
  std::string text;
};

void push(std::vector<Line>& lines, std::int64_t k, int order, json j) {
  lines.push_back({k, order, j.dump()});
}

}  // namespace

json summary_to_json(const RunSummary& s) {
  json done = json::array();
  for (const auto& e : s.done) done.push_back(event_json(e));
  json handoffs = json::array();
  for (const auto& e : s.handoffs) handoffs.push_back(event_json(e));
  json counters = json::array();
  for (const auto& c : s.final_counters) {
    counters.push_back(
        {{"id", c.id}, {"raw", c.raw}, {"pruned", c.pruned}, {"confirmed", c.confirmed}});
  }
  return {{"ticks", s.ticks},
          {"duration", s.duration},
          {"bus", bus_stats_json(s.bus)},
          {"contraction",
           {{"track_checks", s.contraction.track_checks},
            {"track_violations", s.contraction.track_violations},
            {"ci_checks", s.contraction.ci_checks},
            {"ci_violations", s.contraction.ci_violations}}},
          {"done", std::move(done)},
          {"handoffs", std::move(handoffs)},
          {"final_counters", std::move(counters)}};
}

void write_runlog(const RunLog& log, const std::filesystem::path& path) {
  std::vector<Line> lines;
  lines.push_back({-1, 0, json{{"s", "header"}, {"version", 1}, {"config", log.config_echo}}.dump()});

  for (const auto& r : log.truth) {
    json uavs = json::array();
    for (const auto& u : r.uavs) {
      uavs.push_back({{"id", u.id}, {"p", vec3_json(u.position)}, {"v", vec3_json(u.velocity)}});
    }
    json containers = json::array();
    for (const auto& c : r.containers) {
      containers.push_back({{"id", c.id}, {"p", vec3_json(c.position)}});
    }
    push(lines, r.k, 1,
         {{"s", "truth"}, {"k", r.k}, {"t", r.t}, {"uavs", std::move(uavs)},
          {"containers", std::move(containers)}, {"vessel", vec3_json(r.vessel)}});
  }
  for (const auto& r : log.nav) {
    json est = json::array();
    for (const auto& e : r.estimates) est.push_back({{"id", e.id}, {"p", vec3_json(e.position)}});
    push(lines, r.k, 2, {{"s", "nav"}, {"k", r.k}, {"t", r.t}, {"estimates", std::move(est)}});
  }
  for (const auto& r : log.tracks) {
    json tracks = json::array();
    for (const auto& tr : r.tracks) {
      tracks.push_back({{"id", tr.id}, {"p", vec3_json(tr.position)}, {"logdet", tr.logdet}});
    }
    push(lines, r.k, 3 + static_cast<int>(r.agent),
         {{"s", "tracks"}, {"k", r.k}, {"t", r.t}, {"agent", r.agent},
          {"tracks", std::move(tracks)}});
  }
  for (const auto& r : log.fused) {
    json tracks = json::array();
    for (const auto& tr : r.tracks) {
      tracks.push_back({{"id", tr.id}, {"p", vec3_json(tr.position)},
                        {"logdet", tr.logdet}, {"done", tr.done}});
    }
    push(lines, r.k, 100, {{"s", "fused"}, {"k", r.k}, {"t", r.t}, {"tracks", std::move(tracks)}});
  }
  for (const auto& r : log.bus) {
    push(lines, r.k, 101,
         {{"s", "bus"}, {"k", r.k}, {"t", r.t}, {"sent", r.sent}, {"delivered", r.delivered},
          {"dropped", r.dropped}, {"bytes", r.bytes}, {"total_sent", r.total_sent},
          {"total_bytes", r.total_bytes}});
  }
  for (const auto& r : log.counters) {
    json agents = json::array();
    for (const auto& c : r.agents) {
      agents.push_back(
          {{"id", c.id}, {"raw", c.raw}, {"pruned", c.pruned}, {"confirmed", c.confirmed}});
    }
    push(lines, r.k, 102,
         {{"s", "counters"}, {"k", r.k}, {"t", r.t}, {"agents", std::move(agents)}});
  }
  for (const auto& r : log.assigns) {
    json uavs = json::array();
    for (const auto& a : r.uavs) {
      json entry = {{"id", a.id}, {"targets", a.targets}};
      if (a.primary) entry["primary"] = *a.primary;
      uavs.push_back(std::move(entry));
    }
    push(lines, r.k, 103, {{"s", "assign"}, {"k", r.k}, {"t", r.t}, {"uavs", std::move(uavs)}});
  }
  for (const auto& r : log.modes) {
    json uavs = json::array();
    for (const auto& m : r.uavs) {
      json entry = {{"id", m.id}, {"mode", mode_name(m.mode)}};
      if (m.target) entry["target"] = *m.target;
      if (m.hover) entry["hover"] = vec3_json(*m.hover);
      uavs.push_back(std::move(entry));
    }
    json handoffs = json::array();
    for (const auto& e : r.handoffs) handoffs.push_back(event_json(e));
    push(lines, r.k, 104,
         {{"s", "modes"}, {"k", r.k}, {"t", r.t}, {"uavs", std::move(uavs)},
          {"handoffs", std::move(handoffs)}});
  }

  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) {
                     return a.k != b.k ? a.k < b.k : a.order < b.order;
                   });

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunLogError("cannot open for writing: " + tmp.string());
    for (const Line& line : lines) out << line.text << '\n';
    out << json{{"s", "summary"}, {"summary", summary_to_json(log.summary)}}.dump() << '\n';
    if (!out) throw RunLogError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunLog read_runlog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunLogError("cannot open run log: " + path.string());
  RunLog log;
  bool saw_summary = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw RunLogError("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      const std::string stream = j.at("s").get<std::string>();
      if (stream == "header") {
        log.config_echo = j.at("config");
      } else if (stream == "truth") {
        TruthRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        for (const auto& u : j.at("uavs")) {
          r.uavs.push_back({u.at("id").get<AgentId>(), vec3_from(u.at("p")), vec3_from(u.at("v"))});
        }
        for (const auto& c : j.at("containers")) {
          r.containers.push_back({c.at("id").get<std::uint64_t>(), vec3_from(c.at("p"))});
        }
        r.vessel = vec3_from(j.at("vessel"));
        log.truth.push_back(std::move(r));
      } else if (stream == "nav") {
        NavRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        for (const auto& e : j.at("estimates")) {
          r.estimates.push_back({e.at("id").get<AgentId>(), vec3_from(e.at("p"))});
        }
        log.nav.push_back(std::move(r));
      } else if (stream == "tracks") {
        TracksRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        r.agent = j.at("agent").get<AgentId>();
        for (const auto& tr : j.at("tracks")) {
          r.tracks.push_back({tr.at("id").get<TrackId>(), vec3_from(tr.at("p")),
                              tr.at("logdet").get<double>()});
        }
        log.tracks.push_back(std::move(r));
      } else if (stream == "fused") {
        FusedRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        for (const auto& tr : j.at("tracks")) {
          r.tracks.push_back({tr.at("id").get<FusedId>(), vec3_from(tr.at("p")),
                              tr.at("logdet").get<double>(), tr.at("done").get<bool>()});
        }
        log.fused.push_back(std::move(r));
      } else if (stream == "bus") {
        BusRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        r.sent = j.at("sent").get<std::uint64_t>();
        r.delivered = j.at("delivered").get<std::uint64_t>();
        r.dropped = j.at("dropped").get<std::uint64_t>();
        r.bytes = j.at("bytes").get<std::uint64_t>();
        r.total_sent = j.at("total_sent").get<std::uint64_t>();
        r.total_bytes = j.at("total_bytes").get<std::uint64_t>();
        log.bus.push_back(r);
      } else if (stream == "counters") {
        CountersRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        for (const auto& c : j.at("agents")) {
          r.agents.push_back({c.at("id").get<AgentId>(), c.at("raw").get<std::uint64_t>(),
                              c.at("pruned").get<std::uint64_t>(),
                              c.at("confirmed").get<std::uint64_t>()});
        }
        log.counters.push_back(std::move(r));
      } else if (stream == "assign") {
        AssignRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        for (const auto& a : j.at("uavs")) {
          AssignSnap snap;
          snap.id = a.at("id").get<AgentId>();
          snap.targets = a.at("targets").get<std::vector<FusedId>>();
          if (a.contains("primary")) snap.primary = a.at("primary").get<FusedId>();
          r.uavs.push_back(std::move(snap));
        }
        log.assigns.push_back(std::move(r));
      } else if (stream == "modes") {
        ModesRecord r;
        r.k = j.at("k").get<std::int64_t>();
        r.t = j.at("t").get<double>();
        for (const auto& m : j.at("uavs")) {
          ModeSnap snap;
          snap.id = m.at("id").get<AgentId>();
          snap.mode = mode_from(m.at("mode").get<std::string>());
          if (m.contains("target")) snap.target = m.at("target").get<FusedId>();
          if (m.contains("hover")) snap.hover = vec3_from(m.at("hover"));
          r.uavs.push_back(std::move(snap));
        }
        for (const auto& e : j.at("handoffs")) {
          r.handoffs.push_back({e.at("k").get<std::int64_t>(), e.at("t").get<double>(),
                                e.at("uav").get<AgentId>(), e.at("target").get<FusedId>()});
        }
        log.modes.push_back(std::move(r));
      } else if (stream == "summary") {
        const json& s = j.at("summary");
        RunSummary& sum = log.summary;
        sum.ticks = s.at("ticks").get<std::int64_t>();
        sum.duration = s.at("duration").get<double>();
        sum.bus = bus_stats_from(s.at("bus"));
        const json& c = s.at("contraction");
        sum.contraction.track_checks = c.at("track_checks").get<std::uint64_t>();
        sum.contraction.track_violations = c.at("track_violations").get<std::uint64_t>();
        sum.contraction.ci_checks = c.at("ci_checks").get<std::uint64_t>();
        sum.contraction.ci_violations = c.at("ci_violations").get<std::uint64_t>();
        for (const auto& e : s.at("done")) {
          sum.done.push_back({e.at("k").get<std::int64_t>(), e.at("t").get<double>(),
                              e.at("target").get<FusedId>()});
        }
        for (const auto& e : s.at("handoffs")) {
          sum.handoffs.push_back({e.at("k").get<std::int64_t>(), e.at("t").get<double>(),
                                  e.at("uav").get<AgentId>(), e.at("target").get<FusedId>()});
        }
        for (const auto& c2 : s.at("final_counters")) {
          sum.final_counters.push_back(
              {c2.at("id").get<AgentId>(), c2.at("raw").get<std::uint64_t>(),
               c2.at("pruned").get<std::uint64_t>(), c2.at("confirmed").get<std::uint64_t>()});
        }
        saw_summary = true;
      } else {
        throw RunLogError("unknown stream tag: " + stream);
      }
    } catch (const json::exception& e) {
      throw RunLogError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!saw_summary) {
    throw RunLogError("line " + std::to_string(lineno) + ": truncated log, summary record missing");
  }
  return log;
}

}  // namespace seatrack
