#include "s2r/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <system_error>

#include "s2r/calibration.hpp"
#include "s2r/config.hpp"
#include "s2r/errors.hpp"
#include "s2r/io.hpp"
#include "s2r/reports.hpp"

namespace s2r {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kOutputRootVar = "S2R_OUTPUT_ROOT";

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string strategy;
  std::string sequence;
  std::string experiment;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "run configuration (JSON)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "run only this seed");
  cmd->add_option("--strategy", o.strategy, "ideal, fine_tuning, curriculum, ideal2randomized, randomized, ik_baseline");
  cmd->add_option("--sequence", o.sequence, "randomization order, e.g. TNL (or N/A)");
  cmd->add_option("--experiment", o.experiment, "exp1_1rad or exp2_pi9");
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig::defaults() : RunConfig::load(o.config);
  if (!o.experiment.empty()) cfg.set_experiment(parse_experiment(o.experiment));
  if (!o.strategy.empty()) {
    cfg.strategy = parse_strategy(o.strategy);
    if (!requires_permutation(cfg.strategy)) cfg.sequence.reset();
  }
  if (!o.sequence.empty()) {
    if (o.sequence == "N/A") {
      cfg.sequence.reset();
    } else {
      cfg.sequence = parse_permutation(o.sequence);
    }
  }
  if (cfg.sequence && !requires_permutation(cfg.strategy)) {
    throw ScheduleError(std::string(to_string(cfg.strategy)) + " does not take a sequence");
  }
  if (o.seed) cfg.seeds = {*o.seed};
  cfg.validate();
  return cfg;
}

fs::path output_root(const RunConfig& cfg) {
  fs::path p(cfg.output_dir);
  if (const char* root = std::getenv(kOutputRootVar); root != nullptr && *root != '\0' && p.is_relative()) {
    return fs::path(root) / p;
  }
  return p;
}

std::string run_label(const RunConfig& cfg) {
  std::string label(to_string(cfg.strategy));
  if (cfg.sequence) label += "_" + to_string(*cfg.sequence);
  return label;
}

fs::path meta_path(const fs::path& checkpoint) { return checkpoint.string() + ".meta.json"; }

struct CheckpointMeta {
  ArtifactTag tag;
  std::string env_hash;
};

void write_meta(const fs::path& checkpoint, const CheckpointMeta& m) {
  json j = {{"config_hash", m.tag.config_hash},
            {"env_hash", m.env_hash},
            {"strategy", m.tag.strategy},
            {"sequence", m.tag.sequence},
            {"seed", m.tag.seed}};
  write_file_atomic(meta_path(checkpoint), j.dump(2) + "\n");
}

// Loads a checkpoint together with its metadata, refusing files trained
// under a different environment/trainer configuration.
std::pair<PolicyParameters, CheckpointMeta> load_compatible(const fs::path& checkpoint,
                                                            const RunConfig& cfg) {
  if (!fs::exists(checkpoint)) throw CheckpointError("checkpoint not found: " + checkpoint.string());
  const fs::path mp = meta_path(checkpoint);
  if (!fs::exists(mp)) throw CheckpointError("checkpoint metadata not found: " + mp.string());
  CheckpointMeta m;
  try {
    const json j = json::parse(read_file(mp));
    m.tag = {j.at("strategy").get<std::string>(), j.at("sequence").get<std::string>(),
             j.at("seed").get<std::uint64_t>(), j.at("config_hash").get<std::string>()};
    m.env_hash = j.at("env_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint metadata " + mp.string() + ": " + e.what());
  }
  if (m.env_hash != cfg.env_hash()) {
    throw ProtocolMismatch("checkpoint " + checkpoint.string() + " was trained under configuration " +
                           m.env_hash + ", not " + cfg.env_hash());
  }
  return {load_checkpoint(checkpoint), m};
}

EvalEnvironment eval_setup(const RunConfig& cfg) {
  return {cfg.geometry, cfg.evaluation, cfg.pseudo_real};
}

std::vector<EnvKind> parse_env_kinds(const std::string& text) {
  if (text == "both") return {EnvKind::sim, EnvKind::pseudo_real};
  return {parse_env_kind(text)};
}

std::string report_line(const EvalReport& r) {
  std::ostringstream s;
  s << to_string(r.env_kind) << " mean_return=" << format_double(r.mean_return())
    << " median_final_distance=" << format_double(r.median_final_distance())
    << " joint_limit_pct=" << format_double(r.pct_termination(TerminationCause::joint_limit));
  return s.str();
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

class MeasurementLog : public ProgressSink {
 public:
  MeasurementLog(std::ostream& out, std::uint64_t seed) : out_(out), seed_(seed) {}
  void on_update(const UpdateRecord&) override {}
  void on_measurement(const CurvePoint& p) override {
    out_ << "seed " << seed_ << " timesteps " << p.timesteps << " eval_return "
         << format_double(p.mean_return) << '\n';
  }

 private:
  std::ostream& out_;
  std::uint64_t seed_;
};

std::string with_hash_column(const std::string& csv, const std::string& hash) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << line << ',' << (header ? std::string("config_hash") : hash) << '\n';
    header = false;
  }
  return out.str();
}

int cmd_train(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const StrategySchedule schedule = cfg.schedule();
  if (schedule.phases.empty()) {
    throw ConfigError("strategy " + std::string(to_string(cfg.strategy)) +
                      " has no training phases; use the baseline command");
  }
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = timestamp_utc();
  const fs::path root = output_root(cfg);
  const fs::path run_dir = root / run_label(cfg);
  fs::create_directories(run_dir);
  const std::string hash = cfg.hash();
  const EvalEnvironment setup = eval_setup(cfg);

  StrategyContext ctx;
  ctx.geometry = cfg.geometry;
  ctx.training_episode = cfg.training_episode;
  ctx.ranges = cfg.randomization;
  ctx.train = cfg.train;
  ctx.measurement.every = cfg.measurement_every;
  ctx.measurement.evaluate = [setup](const PolicyParameters& p) {
    return evaluate(PolicyAgent(p), EnvKind::sim, setup).mean_return();
  };
  ctx.env_config_hash = cfg.env_hash();
  ctx.pretrain_cache_dir = root / "pretrain_cache";
  ctx.run_dir = run_dir;

  out << "config " << hash << " strategy " << run_label(cfg) << '\n' << describe(schedule);
  json artifacts = json::array();
  for (const std::uint64_t seed : cfg.seeds) {
    MeasurementLog log(out, seed);
    ctx.sink = &log;
    const std::uint64_t one[] = {seed};
    SeedRun run = std::move(run_strategy(schedule, ctx, one).front());
    const fs::path seed_dir = run_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    const ArtifactTag tag{std::string(to_string(cfg.strategy)), schedule.sequence(), seed, hash};
    const fs::path final_ckpt = seed_dir / "final.s2rb";
    save_checkpoint(final_ckpt, run.params);
    write_meta(final_ckpt, {tag, cfg.env_hash()});
    write_file_atomic(seed_dir / "curve.csv", tagged_curve_to_csv({tag, run.curve}));
    write_file_atomic(seed_dir / "progress.csv",
                      with_hash_column(progress_header() + run.progress_rows, hash));
    json phases = json::array();
    for (const auto& p : run.phase_checkpoints) phases.push_back(p.string());
    artifacts.push_back({{"seed", seed},
                         {"checkpoint", final_ckpt.string()},
                         {"curve", (seed_dir / "curve.csv").string()},
                         {"phase_checkpoints", phases}});
    out << "seed " << seed << " done: " << final_ckpt.string() << '\n';
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {{"config_hash", hash},
                   {"env_hash", cfg.env_hash()},
                   {"strategy", to_string(cfg.strategy)},
                   {"sequence", schedule.sequence()},
                   {"seeds", cfg.seeds},
                   {"started_at", started_at},
                   {"wall_time_s", wall},
                   {"artifacts", artifacts},
                   {"config", cfg.to_json()}};
  write_file_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_evaluate(const Overrides& o, const std::string& checkpoint, const std::string& env,
                 const std::string& out_path, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const auto [params, meta] = load_compatible(checkpoint, cfg);
  const PolicyAgent agent(params);
  for (const EnvKind kind : parse_env_kinds(env)) {
    EvalReport report = evaluate(agent, kind, eval_setup(cfg));
    report.strategy = meta.tag.strategy;
    report.sequence = meta.tag.sequence;
    report.seed = meta.tag.seed;
    report.config_hash = cfg.hash();
    fs::path dest = fs::path(checkpoint).parent_path() / ("eval_" + std::string(to_string(kind)) + ".csv");
    if (!out_path.empty()) {
      dest = out_path;
      if (env == "both") dest.replace_filename(dest.stem().string() + "_" + std::string(to_string(kind)) + dest.extension().string());
    }
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    write_file_atomic(dest, report_to_csv(report));
    out << report_line(report) << " -> " << dest.string() << '\n';
  }
  return 0;
}

int cmd_baseline(const Overrides& o, const std::string& env, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = output_root(cfg) / "ik_baseline";
  fs::create_directories(dir);
  const IkAgent agent(cfg.geometry, cfg.evaluation.max_speed, cfg.evaluation.dt);
  for (const EnvKind kind : parse_env_kinds(env)) {
    EvalReport report = evaluate(agent, kind, eval_setup(cfg));
    report.strategy = "ik_baseline";
    report.config_hash = cfg.hash();
    const fs::path dest = dir / ("eval_" + std::string(to_string(kind)) + ".csv");
    write_file_atomic(dest, report_to_csv(report));
    out << report_line(report) << " -> " << dest.string() << '\n';
  }
  return 0;
}

std::string first_line(const fs::path& p) {
  const std::string text = read_file(p);
  std::string line = text.substr(0, text.find('\n'));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

int strategy_rank(const std::string& name) {
  const auto& all = all_strategies();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (to_string(all[i]) == name) return static_cast<int>(i);
  }
  return static_cast<int>(all.size());
}

int cmd_report(const std::vector<std::string>& inputs, std::string out_dir, std::ostream& out) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        const std::string name = e.path().filename().string();
        if (name == "curve.csv" || name.rfind("eval_", 0) == 0) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw ConfigError("no such report file: " + in);
    }
  }

  const std::string report_header = report_to_csv(EvalReport{}).substr(0, report_to_csv(EvalReport{}).size() - 1);
  const std::string curve_header = tagged_curve_to_csv({}).substr(0, tagged_curve_to_csv({}).size() - 1);
  std::vector<EvalReport> reports;
  std::vector<TaggedCurve> curves;
  std::string hash;
  auto check_hash = [&](const std::string& h, const fs::path& p) {
    if (hash.empty()) hash = h;
    if (h != hash) {
      throw ProtocolMismatch("refusing to mix configurations: " + p.string() + " has " + h +
                             ", expected " + hash);
    }
  };
  for (const auto& f : files) {
    const std::string header = first_line(f);
    if (header == report_header) {
      reports.push_back(report_from_csv(read_file(f)));
      if (!reports.back().episodes.empty()) check_hash(reports.back().config_hash, f);
    } else if (header == curve_header) {
      curves.push_back(read_tagged_curve_csv(read_file(f)));
      if (!curves.back().points.empty()) check_hash(curves.back().tag.config_hash, f);
    } else {
      throw ConfigError("not an evaluation report or curve file: " + f.string());
    }
  }
  if (reports.empty()) throw ConfigError("report needs at least one evaluation report");

  if (out_dir.empty()) {
    const char* root = std::getenv(kOutputRootVar);
    out_dir = (fs::path(root != nullptr && *root != '\0' ? root : ".") / "report").string();
  }
  fs::create_directories(out_dir);
  const std::vector<SummaryRow> rows = summarize(reports);
  write_file_atomic(fs::path(out_dir) / "summary.csv", summary_to_csv(rows, hash));
  out << "summary: " << rows.size() << " rows -> " << (fs::path(out_dir) / "summary.csv").string() << '\n';

  if (!curves.empty()) {
    using Key = std::tuple<int, std::string, std::string>;
    std::map<Key, std::vector<std::vector<CurvePoint>>> grouped;
    long long cadence = 0;
    for (const auto& c : curves) {
      grouped[{strategy_rank(c.tag.strategy), c.tag.strategy, c.tag.sequence}].push_back(c.points);
      for (const auto& p : c.points) {
        if (p.timesteps > 0) cadence = std::gcd(cadence, p.timesteps);
      }
    }
    std::vector<CurveSeries> series;
    for (const auto& [key, list] : grouped) {
      const auto& [rank, strategy, sequence] = key;
      series.push_back({sequence == "N/A" ? strategy : strategy + " " + sequence, mean_curve(list)});
    }
    std::optional<double> baseline;
    for (const auto& r : reports) {
      if (r.strategy == "ik_baseline" && r.env_kind == EnvKind::sim) baseline = r.mean_return();
    }
    const fs::path svg = fs::path(out_dir) / "curves.svg";
    write_file_atomic(svg, curve_plot_svg(series, static_cast<double>(std::max<long long>(cadence, 1)),
                                          "Mean evaluation return", baseline, hash));
    out << "curves: " << series.size() << " series -> " << svg.string() << '\n';
  }
  return 0;
}

int cmd_calibrate(const Overrides& o, const std::string& checkpoint, const std::string& param,
                  std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  std::vector<RandParam> params;
  if (param == "all") {
    params = {RandParam::L, RandParam::T, RandParam::N};
  } else if (param == "L" || param == "T" || param == "N") {
    params = {param == "L" ? RandParam::L : param == "T" ? RandParam::T : RandParam::N};
  } else {
    throw ConfigError("calibration parameter must be L, T, N or all");
  }
  const auto [policy, meta] = load_compatible(checkpoint, cfg);
  if (meta.tag.strategy != to_string(StrategyName::ideal)) {
    throw CheckpointError("calibration needs an ideal-trained checkpoint, got " + meta.tag.strategy);
  }
  const PolicyAgent agent(policy);
  const std::string hash = cfg.hash();
  for (const RandParam p : params) {
    const CalibrationResult result =
        calibrate(agent, p, cfg.geometry, cfg.evaluation, cfg.evaluation.target_seed);
    const std::string name = ParamSet::of(p).to_string().substr(1, 1);
    std::ostringstream csv;
    csv << "step,lo,hi,mean_return,degradation,passed,config_hash\n";
    for (std::size_t k = 0; k < result.sweep.size(); ++k) {
      const auto& s = result.sweep[k];
      csv << k << ',' << format_double(s.range.lo) << ',' << format_double(s.range.hi) << ','
          << format_double(s.mean_return) << ',' << format_double(s.degradation) << ','
          << (s.passed ? 1 : 0) << ',' << hash << '\n';
    }
    const fs::path dest = fs::path(checkpoint).parent_path() / ("calibration_" + name + ".csv");
    write_file_atomic(dest, csv.str());
    out << name << " widest [" << format_double(result.widest.lo) << ", "
        << format_double(result.widest.hi) << "] ideal_return " << format_double(result.ideal_return)
        << " -> " << dest.string() << '\n';
  }
  return 0;
}

}  // namespace

int exit_code_for(const std::string& kind) {
  static const std::map<std::string, int> codes = {
      {"ConfigError", 2},     {"ScheduleError", 3}, {"CheckpointError", 4}, {"ProtocolMismatch", 5},
      {"NumericalError", 6},  {"ProtocolError", 7}, {"ShapeError", 8},      {"UsageError", 64},
      {"IoError", 74}};
  const auto it = codes.find(kind);
  return it == codes.end() ? 1 : it->second;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sim-to-real reach benchmark: training, evaluation and reporting", "s2r"};
  app.require_subcommand(1);

  Overrides o;
  std::string checkpoint, env = "sim", out_path, param = "all";
  std::vector<std::string> inputs;

  auto* train = app.add_subcommand("train", "train every configured seed through the strategy's phases");
  add_overrides(train, o, true);

  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on the fixed target set");
  add_overrides(eval, o, true);
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint (.s2rb)")->required();
  eval->add_option("--env", env, "sim, pseudo_real or both");
  eval->add_option("--out", out_path, "report CSV path");

  auto* baseline = app.add_subcommand("baseline", "evaluate the inverse-kinematics controller");
  add_overrides(baseline, o, false);
  baseline->add_option("--env", env, "sim, pseudo_real or both");

  auto* report = app.add_subcommand("report", "summarize evaluation reports and plot curves");
  report->add_option("inputs", inputs, "report/curve CSV files or run directories")->required();
  report->add_option("--out", out_path, "output directory");

  auto* cal = app.add_subcommand("calibrate", "widen one randomization range until the ideal agent degrades");
  add_overrides(cal, o, true);
  cal->add_option("--checkpoint", checkpoint, "ideal-trained checkpoint")->required();
  cal->add_option("--param", param, "L, T, N or all");

  auto* schedule = app.add_subcommand("schedule", "inspect strategy schedules");
  auto* schedule_print = schedule->add_subcommand("print", "print the phase list");
  schedule->require_subcommand(1);
  add_overrides(schedule_print, o, false);

  auto* config = app.add_subcommand("config", "print the resolved configuration as JSON");
  add_overrides(config, o, false);

  std::string command = args.empty() ? std::string() : args.front();
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw Error("UsageError", e.what());
    }

    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_evaluate(o, checkpoint, env, out_path, out);
    if (baseline->parsed()) return cmd_baseline(o, env, out);
    if (report->parsed()) return cmd_report(inputs, out_path, out);
    if (cal->parsed()) return cmd_calibrate(o, checkpoint, param, out);
    if (schedule_print->parsed()) {
      const RunConfig cfg = resolve_config(o);
      out << describe(cfg.schedule());
      return 0;
    }
    if (config->parsed()) {
      out << resolve_config(o).to_json().dump(2) << '\n';
      return 0;
    }
    throw Error("UsageError", "no command given");
  } catch (const Error& e) {
    err << json{{"error", e.kind()}, {"message", e.what()}, {"command", command}}.dump() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << json{{"error", "IoError"}, {"message", e.what()}, {"command", command}}.dump() << '\n';
    return exit_code_for("IoError");
  } catch (const std::system_error& e) {
    err << json{{"error", "IoError"}, {"message", e.what()}, {"command", command}}.dump() << '\n';
    return exit_code_for("IoError");
  } catch (const std::exception& e) {
    err << json{{"error", "InternalError"}, {"message", e.what()}, {"command", command}}.dump() << '\n';
    return 1;
  }
}

}  // namespace s2r
