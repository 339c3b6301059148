#include "s2r/strategies.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "s2r/errors.hpp"
#include "s2r/io.hpp"
#include "s2r/reports.hpp"

namespace s2r {

int ParamSet::size() const { return std::popcount(bits); }

std::string ParamSet::to_string() const {
  std::string out = "{";
  for (auto [p, c] : {std::pair{RandParam::L, 'L'}, {RandParam::T, 'T'}, {RandParam::N, 'N'}}) {
    if (!contains(p)) continue;
    if (out.size() > 1) out += ',';
    out += c;
  }
  return out + "}";
}

Permutation parse_permutation(std::string_view text) {
  if (text.size() != 3) throw ScheduleError("permutation must have three letters: '" + std::string(text) + "'");
  Permutation p{};
  std::uint8_t seen = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    switch (text[i]) {
      case 'L': p[i] = RandParam::L; break;
      case 'T': p[i] = RandParam::T; break;
      case 'N': p[i] = RandParam::N; break;
      default: throw ScheduleError("permutation letters must be L, T or N: '" + std::string(text) + "'");
    }
    const auto bit = static_cast<std::uint8_t>(p[i]);
    if (seen & bit) throw ScheduleError("permutation repeats a parameter: '" + std::string(text) + "'");
    seen |= bit;
  }
  return p;
}

std::string to_string(const Permutation& p) {
  std::string out;
  for (auto param : p) out += param == RandParam::L ? 'L' : param == RandParam::T ? 'T' : 'N';
  return out;
}

const std::array<Permutation, 6>& all_permutations() {
  using enum RandParam;
  static const std::array<Permutation, 6> perms{
      Permutation{T, N, L}, Permutation{T, L, N}, Permutation{N, T, L},
      Permutation{N, L, T}, Permutation{L, T, N}, Permutation{L, N, T}};
  return perms;
}

namespace {
constexpr std::array<std::pair<StrategyName, std::string_view>, 6> kStrategyNames{{
    {StrategyName::ideal, "ideal"},
    {StrategyName::fine_tuning, "fine_tuning"},
    {StrategyName::curriculum, "curriculum"},
    {StrategyName::ideal2randomized, "ideal2randomized"},
    {StrategyName::randomized, "randomized"},
    {StrategyName::ik_baseline, "ik_baseline"},
}};
}  // namespace

StrategyName parse_strategy(std::string_view text) {
  for (auto [name, label] : kStrategyNames) {
    if (label == text) return name;
  }
  throw ScheduleError("unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(StrategyName name) {
  for (auto [n, label] : kStrategyNames) {
    if (n == name) return label;
  }
  return "unknown";
}

bool requires_permutation(StrategyName name) {
  return name == StrategyName::fine_tuning || name == StrategyName::curriculum;
}

const std::array<StrategyName, 6>& all_strategies() {
  static const std::array<StrategyName, 6> names{
      StrategyName::ideal, StrategyName::fine_tuning, StrategyName::curriculum,
      StrategyName::ideal2randomized, StrategyName::randomized, StrategyName::ik_baseline};
  return names;
}

Budgets Budgets::scaled(double factor) {
  auto scale = [&](double v) { return static_cast<long long>(v * factor + 0.5); };
  return {scale(31e6), scale(9e6), scale(3e6)};
}

long long StrategySchedule::total_budget() const {
  long long sum = 0;
  for (const auto& p : phases) sum += p.timestep_budget;
  return sum;
}

std::string StrategySchedule::sequence() const {
  return permutation ? to_string(*permutation) : std::string("N/A");
}

StrategySchedule build_schedule(StrategyName name, std::optional<Permutation> permutation,
                                const Budgets& budgets) {
  if (budgets.pretrain < 0 || budgets.adapt_total < 0 || budgets.per_phase < 0) {
    throw ScheduleError("budgets must be non-negative");
  }
  StrategySchedule s;
  s.name = name;
  if (requires_permutation(name)) {
    if (!permutation) throw ScheduleError(std::string(to_string(name)) + " requires a permutation");
    s.permutation = permutation;
  }
  const ParamSet none{};
  auto pretrain = [&] {
    if (budgets.pretrain <= 0) throw ScheduleError("pretrain budget must be positive");
    s.phases.push_back({budgets.pretrain, none, StartFrom::fresh, true});
  };

  switch (name) {
    case StrategyName::ideal:
    case StrategyName::randomized: {
      if (budgets.total() <= 0) throw ScheduleError("total budget must be positive");
      s.phases.push_back({budgets.total(), name == StrategyName::ideal ? none : ParamSet::all(),
                          StartFrom::fresh, false});
      break;
    }
    case StrategyName::ideal2randomized:
      if (budgets.adapt_total <= 0) throw ScheduleError("adaptation budget must be positive");
      pretrain();
      s.phases.push_back({budgets.adapt_total, ParamSet::all(), StartFrom::inherited, false});
      break;
    case StrategyName::fine_tuning:
    case StrategyName::curriculum: {
      if (budgets.per_phase <= 0 || budgets.adapt_total != 3 * budgets.per_phase) {
        throw ScheduleError("adaptation budget must equal three per-phase budgets");
      }
      pretrain();
      ParamSet active;
      for (RandParam p : *permutation) {
        active = name == StrategyName::fine_tuning ? ParamSet::of(p) : active | ParamSet::of(p);
        s.phases.push_back({budgets.per_phase, active, StartFrom::inherited, false});
      }
      break;
    }
    case StrategyName::ik_baseline:
      break;
  }
  return s;
}

std::string describe(const StrategySchedule& schedule) {
  std::ostringstream out;
  out << "strategy " << to_string(schedule.name) << " sequence " << schedule.sequence() << '\n';
  for (std::size_t i = 0; i < schedule.phases.size(); ++i) {
    const auto& p = schedule.phases[i];
    out << "phase " << i << ": params " << p.active.to_string() << " timesteps "
        << p.timestep_budget << " start " << (p.start_from == StartFrom::fresh ? "fresh" : "inherited")
        << (p.shared_pretrain ? " (shared pretrain)" : "") << '\n';
  }
  out << "total " << schedule.total_budget() << '\n';
  return out.str();
}

RandomizationConfig phase_randomization(const RandomizationConfig& ranges, ParamSet active) {
  RandomizationConfig cfg = ranges;
  cfg.latency_enabled = active.contains(RandParam::L);
  cfg.torque_enabled = active.contains(RandParam::T);
  cfg.noise_enabled = active.contains(RandParam::N);
  return cfg;
}

std::filesystem::path pretrain_cache_path(const StrategyContext& context, std::uint64_t seed,
                                          long long budget) {
  return context.pretrain_cache_dir / ("pretrain_seed" + std::to_string(seed) + "_" +
                                       std::to_string(budget) + "_" + context.env_config_hash + ".s2rb");
}

namespace {

// Collects measurements emitted during one phase and forwards them.
class CurveRecorder : public ProgressSink {
 public:
  explicit CurveRecorder(ProgressSink* next) : next_(next) {}
  void on_update(const UpdateRecord& r) override {
    rows += progress_row(r);
    if (next_ != nullptr) next_->on_update(r);
  }
  void on_measurement(const CurvePoint& p) override {
    points.push_back(p);
    if (next_ != nullptr) next_->on_measurement(p);
  }
  std::vector<CurvePoint> points;
  std::string rows;

 private:
  ProgressSink* next_;
};

struct PhaseArtifact {
  std::filesystem::path checkpoint;
  std::filesystem::path curve;
  std::filesystem::path progress;
  std::filesystem::path meta;
};

PhaseArtifact artifact_paths(const std::filesystem::path& checkpoint) {
  return {checkpoint, std::filesystem::path(checkpoint.string() + ".curve.csv"),
          std::filesystem::path(checkpoint.string() + ".progress.csv"),
          std::filesystem::path(checkpoint.string() + ".key")};
}

struct PhaseResult {
  PolicyParameters params;
  std::vector<CurvePoint> curve;
  std::string rows;
};

std::optional<PhaseResult> load_phase(const PhaseArtifact& a, const std::string& key) {
  if (!std::filesystem::exists(a.checkpoint) || !std::filesystem::exists(a.meta) ||
      !std::filesystem::exists(a.curve) || !std::filesystem::exists(a.progress)) {
    return std::nullopt;
  }
  const std::string stored = read_file(a.meta);
  if (stored != key) {
    throw CheckpointError("refusing to reuse " + a.checkpoint.string() +
                          ": it was produced under a different configuration");
  }
  std::string rows = read_file(a.progress);
  const auto header = progress_header();
  if (rows.rfind(header, 0) != 0) throw CheckpointError("malformed progress file " + a.progress.string());
  return PhaseResult{load_checkpoint(a.checkpoint), read_curve_csv(read_file(a.curve)),
                     rows.substr(header.size())};
}

void store_phase(const PhaseArtifact& a, const std::string& key, const PhaseResult& result) {
  // Key last: an interrupted write leaves no key.
  save_checkpoint(a.checkpoint, result.params);
  write_file_atomic(a.curve, curve_to_csv(result.curve));
  write_file_atomic(a.progress, progress_header() + result.rows);
  write_file_atomic(a.meta, key);
}

}  // namespace

std::vector<SeedRun> run_strategy(const StrategySchedule& schedule, const StrategyContext& context,
                                  std::span<const std::uint64_t> seeds) {
  std::vector<SeedRun> runs;
  for (const std::uint64_t seed : seeds) {
    SeedRun run;
    run.seed = seed;
    std::optional<PolicyParameters> params;
    long long offset = 0;
    std::string lineage = context.env_config_hash + "|seed=" + std::to_string(seed);
    for (std::size_t k = 0; k < schedule.phases.size(); ++k) {
      const Phase& phase = schedule.phases[k];
      lineage += "|" + phase.active.to_string() + "x" + std::to_string(phase.timestep_budget);
      const std::string key = hex64(fnv1a64(lineage));

      std::optional<PhaseArtifact> artifact;
      if (phase.shared_pretrain && !context.pretrain_cache_dir.empty()) {
        artifact = artifact_paths(pretrain_cache_path(context, seed, phase.timestep_budget));
      } else if (!context.run_dir.empty()) {
        artifact = artifact_paths(context.run_dir / ("seed_" + std::to_string(seed)) /
                                  ("phase_" + std::to_string(k) + ".s2rb"));
      }

      std::optional<PhaseResult> done;
      if (artifact) done = load_phase(*artifact, key);
      if (done) {
        params = std::move(done->params);
        run.curve.insert(run.curve.end(), done->curve.begin(), done->curve.end());
        run.progress_rows += done->rows;
        if (context.sink != nullptr) {
          for (const auto& p : done->curve) context.sink->on_measurement(p);
        }
      } else {
        TrainConfig cfg = context.train;
        cfg.total_timesteps = phase.timestep_budget;
        cfg.seed = derive_seed(seed, 0x5048415345ULL, k);
        PolicyParameters init = phase.start_from == StartFrom::inherited && params
                                    ? *params
                                    : initial_parameters(cfg);
        const RandomizationConfig rand = phase_randomization(context.ranges, phase.active);
        const RobotGeometry geom = context.geometry;
        const EpisodeConfig episode = context.training_episode;
        EnvFactory factory = [geom, episode, rand](int, std::uint64_t env_seed) {
          return RandomizedEnv(geom, episode, rand, env_seed);
        };
        MeasurementPlan plan = context.measurement;
        plan.measure_at_start = k == 0;
        CurveRecorder recorder(context.sink);
        TrainOptions options;
        options.timestep_offset = offset;
        options.sink = &recorder;
        options.measurement = plan.evaluate ? &plan : nullptr;
        options.execution = context.execution;
        params = train_loop(factory, cfg, std::move(init), options);
        run.curve.insert(run.curve.end(), recorder.points.begin(), recorder.points.end());
        run.progress_rows += recorder.rows;
        if (artifact) store_phase(*artifact, key, {*params, recorder.points, recorder.rows});
      }
      if (artifact) run.phase_checkpoints.push_back(artifact->checkpoint);
      offset += phase.timestep_budget;
    }
    if (params) run.params = std::move(*params);
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace s2r
