#include "s2r/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>

#include "s2r/errors.hpp"
#include "s2r/strategies.hpp"

namespace s2r {

void EvalProtocol::validate() const {
  if (n_targets <= 0) throw ConfigError("evaluation needs at least one target");
  if (!(target_margin >= 0.0)) throw ConfigError("target_margin must be >= 0");
  limits.validate();
  episode_config().validate();
}

EpisodeConfig EvalProtocol::episode_config() const {
  EpisodeConfig cfg;
  cfg.horizon = horizon;
  cfg.dt = dt;
  cfg.max_speed = max_speed;
  cfg.mode = Mode::evaluation;
  cfg.min_target_height = min_target_height;
  cfg.safety_limits = limits;
  return cfg;
}

RandomizationConfig PseudoRealConfig::to_randomization() const {
  RandomizationConfig cfg;
  cfg.latency_enabled = latency > 0.0;
  cfg.latency = {latency, latency};
  cfg.torque_enabled = stiffness > 0.0 || damping > 0.0;
  cfg.stiffness = {stiffness, stiffness};
  cfg.damping = {damping, damping};
  cfg.noise_enabled = noise > 0.0;
  cfg.noise = {noise, noise};
  return cfg;
}

void PseudoRealConfig::check_interior(const RandomizationConfig& r) const {
  auto inside = [](double v, const Range& range, const char* name) {
    if (v != 0.0 && !(v > range.lo && v < range.hi)) {
      throw ConfigError(std::string("pseudo-real ") + name + " must lie strictly inside the training range");
    }
  };
  inside(latency, r.latency, "latency");
  inside(stiffness, r.stiffness, "stiffness");
  inside(damping, r.damping, "damping");
  inside(noise, r.noise, "noise");
}

std::string_view to_string(EnvKind kind) { return kind == EnvKind::sim ? "sim" : "pseudo_real"; }

EnvKind parse_env_kind(std::string_view text) {
  if (text == "sim") return EnvKind::sim;
  if (text == "pseudo_real") return EnvKind::pseudo_real;
  throw ConfigError("unknown environment kind '" + std::string(text) + "'");
}

std::vector<Vec3> evaluation_targets(const RobotGeometry& geom, const EvalProtocol& protocol) {
  protocol.validate();
  const double q1_bound = protocol.limits.q1_max - protocol.target_margin;
  const double q2_bound = protocol.limits.q2_max - protocol.target_margin;
  Rng rng(protocol.target_seed);
  std::vector<Vec3> targets;
  targets.reserve(static_cast<std::size_t>(protocol.n_targets));
  int attempts = 0;
  while (static_cast<int>(targets.size()) < protocol.n_targets) {
    if (++attempts > 1000 * protocol.n_targets) {
      throw ConfigError("evaluation limits leave no admissible targets");
    }
    const Vec3 p = sample_target(geom, protocol.min_target_height, rng);
    const IkSolution ik = solve_ik(geom, p);
    if (std::abs(ik.q1_star) < q1_bound && std::abs(ik.q2_star) < q2_bound) targets.push_back(p);
  }
  return targets;
}

PolicyAgent::PolicyAgent(PolicyParameters params)
    : params_(std::make_shared<const PolicyParameters>(std::move(params))) {
  params_->validate();
}

Controller PolicyAgent::start_episode(int, const Vec3&) const {
  return [params = params_](const Observation& obs) { return policy_mean_action(*params, obs); };
}

IkAgent::IkAgent(RobotGeometry geom, double max_speed, double dt)
    : geom_(geom), max_speed_(max_speed), dt_(dt) {}

Controller IkAgent::start_episode(int, const Vec3& target) const {
  const IkSolution solution = solve_ik(geom_, target);
  return [solution, max_speed = max_speed_, dt = dt_](const Observation& obs) {
    return baseline_policy(solution, RobotState{obs.q1(), obs.q2(), 0.0, 0.0}, max_speed, dt);
  };
}

RandomAgent::RandomAgent(std::uint64_t seed, double max_speed) : seed_(seed), max_speed_(max_speed) {}

Controller RandomAgent::start_episode(int target_index, const Vec3&) const {
  auto rng = std::make_shared<Rng>(derive_seed(seed_, 7, static_cast<std::uint64_t>(target_index)));
  return [rng, max_speed = max_speed_](const Observation&) { return random_policy(*rng, max_speed); };
}

Controller ConstantAgent::start_episode(int, const Vec3&) const {
  return [a = action_](const Observation&) { return a; };
}

double EvalReport::mean_return() const {
  if (episodes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : episodes) sum += e.episode_return;
  return sum / static_cast<double>(episodes.size());
}

double EvalReport::std_return() const {
  if (episodes.empty()) return 0.0;
  const double mean = mean_return();
  double var = 0.0;
  for (const auto& e : episodes) var += (e.episode_return - mean) * (e.episode_return - mean);
  return std::sqrt(var / static_cast<double>(episodes.size()));
}

double EvalReport::pct_termination(TerminationCause cause) const {
  if (episodes.empty()) return 0.0;
  const auto n = std::count_if(episodes.begin(), episodes.end(),
                               [&](const EpisodeRecord& e) { return e.cause == cause; });
  return 100.0 * static_cast<double>(n) / static_cast<double>(episodes.size());
}

double EvalReport::median_final_distance() const {
  if (episodes.empty()) return 0.0;
  std::vector<double> d;
  for (const auto& e : episodes) d.push_back(e.final_distance);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

EpisodeRecord run_episode(const EvalAgent& agent, RandomizedEnv& env, int target_index,
                          const Vec3& target) {
  EpisodeRecord rec;
  rec.target_index = target_index;
  rec.target = target;
  const Controller act = agent.start_episode(target_index, target);
  Observation obs = env.reset(target);
  while (true) {
    const StepResult r = env.step(act(obs));
    rec.episode_return += r.reward;
    ++rec.steps;
    obs = r.observation;
    if (r.terminated) {
      rec.cause = r.termination_cause;
      break;
    }
  }
  rec.final_distance = env.bare().distance();
  return rec;
}

EvalReport evaluate_randomized(const EvalAgent& agent, const RandomizationConfig& randomization,
                               std::uint64_t env_seed, const RobotGeometry& geom,
                               const EvalProtocol& protocol, Execution execution) {
  const std::vector<Vec3> targets = evaluation_targets(geom, protocol);
  const EpisodeConfig episode = protocol.episode_config();
  const int n = static_cast<int>(targets.size());
  EvalReport report;
  report.episodes.resize(targets.size());
  auto run = [&](int i) {
    RandomizedEnv env(geom, episode, randomization, derive_seed(env_seed, 11, static_cast<std::uint64_t>(i)));
    report.episodes[i] = run_episode(agent, env, i, targets[i]);
  };
  if (execution == Execution::serial) {
    for (int i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::exception_ptr> errors(targets.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      try {
        run(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return report;
}

EvalReport evaluate(const EvalAgent& agent, EnvKind kind, const EvalEnvironment& setup,
                    Execution execution) {
  const RandomizationConfig randomization =
      kind == EnvKind::sim ? RandomizationConfig::none() : setup.pseudo_real.to_randomization();
  EvalReport report = evaluate_randomized(agent, randomization, setup.pseudo_real.hidden_seed,
                                          setup.geometry, setup.protocol, execution);
  report.env_kind = kind;
  return report;
}

double sim2real_gap(const EvalReport& sim, const EvalReport& real) {
  if (sim.episodes.size() != real.episodes.size()) {
    throw ProtocolMismatch("reports cover different numbers of targets");
  }
  for (std::size_t i = 0; i < sim.episodes.size(); ++i) {
    if (sim.episodes[i].target_index != real.episodes[i].target_index ||
        sim.episodes[i].target != real.episodes[i].target) {
      throw ProtocolMismatch("reports were produced on different target sets");
    }
  }
  if (sim.strategy != real.strategy || sim.sequence != real.sequence || sim.seed != real.seed) {
    throw ProtocolMismatch("reports belong to different policies");
  }
  if (!sim.config_hash.empty() && !real.config_hash.empty() && sim.config_hash != real.config_hash) {
    throw ProtocolMismatch("reports were produced under different configurations");
  }
  return sim.mean_return() - real.mean_return();
}

namespace {

int strategy_rank(const std::string& s) {
  for (std::size_t i = 0; i < all_strategies().size(); ++i) {
    if (to_string(all_strategies()[i]) == s) return static_cast<int>(i);
  }
  return static_cast<int>(all_strategies().size());
}

int sequence_rank(const std::string& s) {
  if (s == "N/A") return -1;
  for (std::size_t i = 0; i < all_permutations().size(); ++i) {
    if (to_string(all_permutations()[i]) == s) return static_cast<int>(i);
  }
  return static_cast<int>(all_permutations().size());
}

struct GroupKey {
  std::string strategy;
  std::string sequence;
  auto tie() const {
    return std::tuple(strategy_rank(strategy), strategy, sequence_rank(sequence), sequence);
  }
  bool operator<(const GroupKey& o) const { return tie() < o.tie(); }
};

struct SeedResults {
  const EvalReport* sim = nullptr;
  const EvalReport* pseudo_real = nullptr;
};

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size() - 1));
}

SummaryRow summarize_group(const std::string& strategy, const std::string& sequence,
                           const std::vector<std::pair<std::uint64_t, SeedResults>>& seeds,
                           bool best_columns) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  SummaryRow row{strategy, sequence, nan, nan, nan, nan, nan, 0.0, 0, false, false};
  std::vector<double> sim_means;
  const EvalReport* best = nullptr;
  const EvalReport* best_real = nullptr;
  long long limit_hits = 0;
  long long episodes = 0;
  bool any_real = false;
  for (const auto& [seed, r] : seeds) any_real = any_real || r.pseudo_real != nullptr;
  for (const auto& [seed, r] : seeds) {
    if (r.sim != nullptr) {
      const double m = r.sim->mean_return();
      sim_means.push_back(m);
      if (best == nullptr || m > best->mean_return()) {
        best = r.sim;
        best_real = r.pseudo_real;
      }
    }
    const EvalReport* counted = any_real ? r.pseudo_real : r.sim;
    if (counted != nullptr) {
      for (const auto& e : counted->episodes) limit_hits += e.cause == TerminationCause::joint_limit;
      episodes += static_cast<long long>(counted->episodes.size());
    }
  }
  row.n_seeds = static_cast<int>(seeds.size());
  row.has_sim = !sim_means.empty();
  row.has_pseudo_real = any_real;
  if (row.has_sim) {
    row.avg_sim = std::accumulate(sim_means.begin(), sim_means.end(), 0.0) /
                  static_cast<double>(sim_means.size());
    row.std_sim = sample_std(sim_means);
  }
  if (best_columns && best != nullptr) {
    row.best_sim = best->mean_return();
    if (best_real != nullptr) {
      row.best_pseudo_real = best_real->mean_return();
      row.gap = sim2real_gap(*best, *best_real);
    }
  } else if (best_columns && !row.has_sim && any_real) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [seed, r] : seeds) {
      if (r.pseudo_real != nullptr) top = std::max(top, r.pseudo_real->mean_return());
    }
    row.best_pseudo_real = top;
  }
  row.pct_joint_limit = episodes > 0 ? 100.0 * static_cast<double>(limit_hits) / static_cast<double>(episodes) : 0.0;
  return row;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<EvalReport>& reports) {
  std::map<GroupKey, std::map<std::uint64_t, SeedResults>> groups;
  for (const auto& r : reports) {
    auto& slot = groups[{r.strategy, r.sequence}][r.seed];
    (r.env_kind == EnvKind::sim ? slot.sim : slot.pseudo_real) = &r;
  }
  std::vector<SummaryRow> rows;
  std::string current;
  for (auto it = groups.begin(); it != groups.end(); ++it) {
    const auto& [key, seeds] = *it;
    if (key.strategy != current) {
      current = key.strategy;
      std::vector<std::pair<std::uint64_t, SeedResults>> pooled;
      int sequences = 0;
      for (auto jt = it; jt != groups.end() && jt->first.strategy == current; ++jt) {
        ++sequences;
        pooled.insert(pooled.end(), jt->second.begin(), jt->second.end());
      }
      if (sequences > 1) rows.push_back(summarize_group(current, "N/A", pooled, false));
    }
    rows.push_back(summarize_group(key.strategy, key.sequence, {seeds.begin(), seeds.end()}, true));
  }
  return rows;
}

}  // namespace s2r
