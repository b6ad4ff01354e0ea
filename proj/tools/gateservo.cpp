// gateservo: closed-loop gate navigation simulator.
//
// Subcommands:
//   run        execute one scenario, write trajectory/metrics/summary/report
//   batch      repeated or orientation-sweep runs with a summary table
//   eval-rmse  corner-prediction RMSE over a delimited dataset file
//   rf         receptive field of a conv stack given kernel,stride pairs

#include "gateservo/config.hpp"
#include "gateservo/log.hpp"
#include "gateservo/perception.hpp"
#include "gateservo/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gateservo;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write \"" + path.string() + "\"");
  out << content;
  if (!out) throw std::runtime_error("write failed for \"" + path.string() + "\"");
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

json metrics_json(const RunMetrics& m) { return json::parse(m.to_json()); }

std::string run_summary_text(const Scenario& sc, const RunMetrics& m) {
  std::ostringstream os;
  os << "scenario:      " << sc.name << "\n";
  os << "seed:          " << sc.seed << "\n";
  os << "elapsed:       " << format_seconds(m.elapsed) << " s (of "
     << format_seconds(sc.duration) << " s)\n";
  os << "gates passed:  " << m.gates_passed << "\n";
  os << "distance:      " << format_seconds(m.distance) << " m\n";
  os << "peak speed:    " << format_seconds(m.peak_speed) << " m/s\n";
  os << "crashed:       " << (m.crashed ? "yes" : "no") << "\n";
  os << "success:       " << (m.success ? "yes" : "no") << "\n";
  os << "traversals:   ";
  if (m.traversal_times.empty()) {
    os << " (none)";
  } else {
    for (double t : m.traversal_times) os << " " << format_seconds(t);
  }
  os << "\n";
  return os.str();
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
};

LoadedConfig load_with_overrides(const std::string& config_path,
                                 const Overrides& ov) {
  LoadedConfig lc = load_config(config_path);
  if (ov.seed) lc.scenario.seed = *ov.seed;
  if (ov.duration) {
    lc.scenario.duration = *ov.duration;
    lc.scenario.validate();
  }
  return lc;
}

int cmd_run(const std::string& config_path, const Overrides& ov,
            const std::string& out_dir) {
  const LoadedConfig lc = load_with_overrides(config_path, ov);
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult rr = run_scenario(lc.scenario);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const fs::path csv_path = dir / "trajectory.csv";
  const fs::path metrics_path = dir / "metrics.json";
  const fs::path summary_path = dir / "summary.txt";
  const fs::path report_path = dir / "report.json";

  write_file(csv_path, rr.log.to_csv());
  write_file(metrics_path, rr.metrics.to_json() + "\n");
  const std::string summary = run_summary_text(lc.scenario, rr.metrics);
  write_file(summary_path, summary);

  json report;
  report["scenario"] = lc.scenario.name;
  report["seed"] = lc.scenario.seed;
  report["metrics"] = metrics_json(rr.metrics);
  report["artifacts"] = {{"trajectory_csv", csv_path.string()},
                         {"metrics_json", metrics_path.string()},
                         {"summary_txt", summary_path.string()}};
  report["wall_clock_s"] = wall;
  write_file(report_path, report.dump(2) + "\n");

  std::fputs(summary.c_str(), stdout);
  log::info("artifacts in %s (%.3f s wall clock)", out_dir.c_str(), wall);
  return rr.metrics.success ? 0 : 2;
}

json orientation_row_json(const OrientationRow& r) {
  json j;
  j["orientation_deg"] = r.orientation_deg;
  j["repeats"] = r.repeats;
  j["successes"] = r.successes;
  j["success_rate"] = r.repeats > 0 ? double(r.successes) / r.repeats : 0.0;
  j["avg_time"] = r.avg_time;
  j["best_time"] = r.best_time;
  j["avg_gates"] = r.avg_gates;
  j["best_gates"] = r.best_gates;
  j["avg_distance"] = r.avg_distance;
  j["best_distance"] = r.best_distance;
  return j;
}

std::string orientation_table_text(const std::vector<OrientationRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%12s %9s %9s %9s %9s %9s %9s %9s\n",
                "orient[deg]", "success", "avg_t[s]", "best_t[s]", "avg_gate",
                "best_gate", "avg_d[m]", "best_d[m]");
  os << line;
  for (const auto& r : rows) {
    char rate[16];
    std::snprintf(rate, sizeof(rate), "%d/%d", r.successes, r.repeats);
    std::snprintf(line, sizeof(line),
                  "%12.1f %9s %9.2f %9.2f %9.2f %9d %9.2f %9.2f\n",
                  r.orientation_deg, rate, r.avg_time, r.best_time, r.avg_gates,
                  r.best_gates, r.avg_distance, r.best_distance);
    os << line;
  }
  return os.str();
}

int cmd_batch(const std::string& config_path, const Overrides& ov,
              std::optional<int> repeats_flag, const std::string& out_dir) {
  LoadedConfig lc = load_with_overrides(config_path, ov);
  const int repeats = repeats_flag ? *repeats_flag : lc.experiment.repeats;
  if (repeats < 1) throw std::runtime_error("batch: repeats must be >= 1");

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  if (lc.experiment.type == ExperimentSpec::Type::kOrientation) {
    const std::vector<OrientationRow> rows = orientation_experiment(
        lc.scenario, lc.experiment.orientations_deg, repeats,
        lc.experiment.approach_distance);
    json j = json::array();
    for (const auto& r : rows) j.push_back(orientation_row_json(r));
    const std::string table = orientation_table_text(rows);
    write_file(dir / "summary.json", j.dump(2) + "\n");
    write_file(dir / "summary.txt", table);
    std::fputs(table.c_str(), stdout);
    return 0;
  }

  // Plain repeated runs: run 0 uses the configured seed, later runs reseed.
  json runs = json::array();
  int successes = 0;
  double gates_sum = 0.0, dist_sum = 0.0, time_sum = 0.0;
  int best_gates = 0, timed = 0;
  double best_dist = 0.0;
  double best_time = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream table;
  char line[160];
  std::snprintf(line, sizeof(line), "%5s %20s %8s %7s %9s %9s %9s\n", "run",
                "seed", "success", "gates", "dist[m]", "peak[m/s]", "t1[s]");
  table << line;
  for (int i = 0; i < repeats; ++i) {
    Scenario sc = lc.scenario;
    if (i > 0) {
      sc.seed = derive_seed(lc.scenario.seed, static_cast<std::uint64_t>(i));
      sc.perception.seed = 0;
    }
    const RunResult rr = run_scenario(sc);
    char idx[16];
    std::snprintf(idx, sizeof(idx), "%03d", i);
    write_file(dir / (std::string("trajectory_") + idx + ".csv"), rr.log.to_csv());
    write_file(dir / (std::string("metrics_") + idx + ".json"),
               rr.metrics.to_json() + "\n");

    const RunMetrics& m = rr.metrics;
    const bool ok = m.gates_passed >= 1 && !m.crashed;
    successes += ok ? 1 : 0;
    gates_sum += m.gates_passed;
    dist_sum += m.distance;
    best_gates = std::max(best_gates, m.gates_passed);
    best_dist = std::max(best_dist, m.distance);
    const double t1 = m.traversal_times.empty()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : m.traversal_times.front();
    if (!std::isnan(t1)) {
      time_sum += t1;
      timed += 1;
      best_time = std::isnan(best_time) ? t1 : std::min(best_time, t1);
    }
    json jr = metrics_json(m);
    jr["run"] = i;
    jr["seed"] = sc.seed;
    runs.push_back(jr);
    std::snprintf(line, sizeof(line), "%5d %20llu %8s %7d %9.2f %9.2f %9.2f\n",
                  i, static_cast<unsigned long long>(sc.seed),
                  ok ? "yes" : "no", m.gates_passed, m.distance, m.peak_speed,
                  t1);
    table << line;
  }

  json j;
  j["runs"] = runs;
  j["aggregate"] = {
      {"repeats", repeats},
      {"successes", successes},
      {"success_rate", double(successes) / repeats},
      {"avg_gates", gates_sum / repeats},
      {"best_gates", best_gates},
      {"avg_distance", dist_sum / repeats},
      {"best_distance", best_dist},
      {"avg_time", timed > 0 ? time_sum / timed
                             : std::numeric_limits<double>::quiet_NaN()},
      {"best_time", best_time},
  };
  write_file(dir / "summary.json", j.dump(2) + "\n");
  write_file(dir / "summary.txt", table.str());
  std::fputs(table.str().c_str(), stdout);
  return 0;
}

int cmd_eval_rmse(const std::string& dataset_path) {
  std::ifstream in(dataset_path);
  if (!in) throw std::runtime_error("cannot open \"" + dataset_path + "\"");

  std::vector<FeatureVec> truths, preds;
  std::vector<std::string> bad;
  std::string lineText;
  int lineno = 0;
  while (std::getline(in, lineText)) {
    ++lineno;
    // Normalize comma/tab delimiters to spaces, then split.
    std::string norm = lineText;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::replace(norm.begin(), norm.end(), '\t', ' ');
    std::istringstream ss(norm);
    std::vector<double> f;
    std::string tok;
    bool parsed_ok = true;
    while (ss >> tok) {
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        bad.push_back("line " + std::to_string(lineno) + ": invalid number \"" + tok + "\"");
        parsed_ok = false;
        break;
      }
      f.push_back(v);
    }
    if (!parsed_ok) continue;
    if (f.empty()) continue;  // blank line
    if (f.size() != 20) {
      bad.push_back("line " + std::to_string(lineno) + ": expected 20 fields (8 truth, 8 predicted, 4 visibility), got " +
                    std::to_string(f.size()));
      continue;
    }
    FeatureVec t, p;
    bool flags_ok = true;
    for (int c = 0; c < 4; ++c) {
      const double flag = f[16 + c];
      if (flag != 0.0 && flag != 1.0) flags_ok = false;
      t.visible[c] = p.visible[c] = flag != 0.0;
    }
    if (!flags_ok) {
      bad.push_back("line " + std::to_string(lineno) + ": visibility flags must be 0 or 1");
      continue;
    }
    for (int k = 0; k < 8; ++k) {
      t.coords[k] = f[k];
      p.coords[k] = f[8 + k];
    }
    truths.push_back(t);
    preds.push_back(p);
  }
  if (!bad.empty()) {
    for (const auto& msg : bad) log::error("%s: %s", dataset_path.c_str(), msg.c_str());
    return 1;
  }
  if (truths.empty()) throw std::runtime_error("dataset \"" + dataset_path + "\" has no rows");

  const RmseReport rep = rmse_report(preds, truths);
  std::printf("overall_rmse_px %.6f\n", rep.overall);
  for (int c = 0; c < 4; ++c) {
    std::printf("corner_%d_rmse_px %.6f (n=%zu)\n", c, rep.per_corner[c],
                rep.samples[c]);
  }
  std::printf("rows %zu\n", truths.size());
  return 0;
}

int cmd_rf(const std::vector<std::string>& tokens) {
  std::vector<ConvLayerSpec> layers;
  for (const auto& tok : tokens) {
    ConvLayerSpec l;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto r1 = std::from_chars(b, e, l.kernel);
    if (r1.ec != std::errc{} || r1.ptr == e || *r1.ptr != ',') {
      throw std::runtime_error("rf: invalid layer token \"" + tok + "\" (expected KERNEL,STRIDE)");
    }
    auto r2 = std::from_chars(r1.ptr + 1, e, l.stride);
    if (r2.ec != std::errc{} || r2.ptr != e) {
      throw std::runtime_error("rf: invalid layer token \"" + tok + "\" (expected KERNEL,STRIDE)");
    }
    if (l.kernel < 1 || l.stride < 1) {
      throw std::runtime_error("rf: invalid layer token \"" + tok + "\" (kernel and stride must be >= 1)");
    }
    layers.push_back(l);
  }
  std::printf("%d\n", receptive_field(layers));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gate-servoing simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", dataset_path;
  Overrides ov;
  std::uint64_t seed_flag = 0;
  double duration_flag = 0.0;
  int repeats_flag = 0;
  std::vector<std::string> rf_tokens;

  auto add_common = [&](CLI::App* cmd, bool with_repeats) {
    cmd->add_option("--config", config_path, "scenario config (JSON)")
        ->required();
    cmd->add_option("--seed", seed_flag, "override the config seed");
    cmd->add_option("--duration", duration_flag, "override the duration, seconds");
    cmd->add_option("--out-dir", out_dir, "output directory (default: out)");
    if (with_repeats) {
      cmd->add_option("--repeats", repeats_flag, "runs per condition");
    }
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario");
  add_common(run_cmd, false);
  CLI::App* batch_cmd =
      app.add_subcommand("batch", "repeated or orientation-sweep runs");
  add_common(batch_cmd, true);
  CLI::App* rmse_cmd =
      app.add_subcommand("eval-rmse", "corner RMSE over a dataset file");
  rmse_cmd->add_option("dataset", dataset_path, "delimited text dataset")
      ->required();
  CLI::App* rf_cmd =
      app.add_subcommand("rf", "receptive field of a conv stack");
  rf_cmd->add_option("layers", rf_tokens, "layers as KERNEL,STRIDE tokens")
      ->required();

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* cmd : {run_cmd, batch_cmd}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--seed") > 0) ov.seed = seed_flag;
    if (cmd->count("--duration") > 0) ov.duration = duration_flag;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, ov, out_dir);
    if (batch_cmd->parsed()) {
      return cmd_batch(config_path, ov,
                       repeats_flag > 0 ? std::optional<int>(repeats_flag)
                                        : std::nullopt,
                       out_dir);
    }
    if (rmse_cmd->parsed()) return cmd_eval_rmse(dataset_path);
    if (rf_cmd->parsed()) return cmd_rf(rf_tokens);
  } catch (const std::exception& e) {
    log::error("%s", e.what());
    return 1;
  }
  return 0;
}
