#include "seatrack/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "seatrack/config.hpp"
#include "seatrack/eval.hpp"
#include "seatrack/runlog.hpp"
#include "seatrack/sim.hpp"

namespace seatrack {

namespace {

namespace fs = std::filesystem;

// SEATRACK_LOG=quiet silences progress chatter; anything else keeps it.
bool verbose() {
  const char* v = std::getenv("SEATRACK_LOG");
  return v == nullptr || std::string(v) != "quiet";
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
  ScenarioConfig cfg;
  try {
    cfg = parse_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (verbose()) {
      std::cerr << "running " << cfg.duration << " s at " << cfg.rates.tick_hz
                << " Hz, seed " << cfg.seed << "\n";
    }
    const RunLog log = run_scenario(cfg);
    fs::create_directories(out_dir);
    write_runlog(log, fs::path(out_dir) / "runlog.jsonl");
    write_json_atomic(fs::path(out_dir) / "summary.json", summary_to_json(log.summary));
    write_json_atomic(fs::path(out_dir) / "config.json", log.config_echo);
    if (verbose()) std::cerr << "wrote " << (fs::path(out_dir) / "runlog.jsonl").string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_report(const std::string& runlog_path, const std::string& out_dir, double radius) {
  try {
    const RunLog log = read_runlog(runlog_path);
    const MetricsReport report = compute_metrics(log, radius);
    write_report_files(log, report, out_dir);
    if (verbose()) std::cerr << "wrote " << (fs::path(out_dir) / "report.json").string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  try {
    const ScenarioConfig cfg = parse_config(config_path);
    cfg.validate();
    std::cout << "ok: " << cfg.agents.size() << " agents, " << cfg.containers.size()
              << " containers, " << cfg.duration << " s\n";
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace seatrack
