#include "s2r/config.hpp"

#include <fstream>
#include <set>

#include "s2r/errors.hpp"
#include "s2r/io.hpp"

namespace s2r {

using nlohmann::json;

std::string_view to_string(Experiment e) { return e == Experiment::exp1_1rad ? "exp1_1rad" : "exp2_pi9"; }

Experiment parse_experiment(std::string_view text) {
  if (text == "exp1_1rad") return Experiment::exp1_1rad;
  if (text == "exp2_pi9") return Experiment::exp2_pi9;
  throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

RunConfig RunConfig::defaults(Experiment experiment) {
  RunConfig c;
  c.set_experiment(experiment);
  return c;
}

void RunConfig::set_experiment(Experiment e) {
  experiment = e;
  if (e == Experiment::exp1_1rad) {
    training_episode.max_speed = 1.0;
    training_episode.horizon = 250;
  } else {
    training_episode.max_speed = std::numbers::pi / 9.0;
    training_episode.horizon = 500;
  }
}

void RunConfig::validate() const {
  geometry.validate();
  training_episode.validate();
  if (training_episode.mode != Mode::training) throw ConfigError("training episodes must use training mode");
  evaluation.validate();
  randomization.validate();
  pseudo_real.check_interior(randomization);
  train.validate();
  if (measurement_every <= 0) throw ConfigError("measurement_every must be positive");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (requires_permutation(strategy) && !sequence) {
    throw ScheduleError(std::string(to_string(strategy)) + " requires a sequence");
  }
  if (!(training_episode.min_target_height < geometry.max_height())) {
    throw ConfigError("min_target_height must lie below the reachable shell's top");
  }
  schedule();
}

StrategySchedule RunConfig::schedule() const { return build_schedule(strategy, sequence, budgets); }

namespace {

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

json limits_deg(const JointLimits& l) {
  return {{"q1", rad_to_deg(l.q1_max)}, {"q2", rad_to_deg(l.q2_max)}};
}

// Strict object reader: every listed key must be present, nothing else.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError("unknown key '" + path_ + "." + key + "'");
    }
  }
  const json& at(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing key '" + path_ + "." + key + "'");
    return j_.at(key);
  }
  template <typename T>
  T get(const std::string& key) {
    try {
      return at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + path_ + "." + key + "': " + e.what());
    }
  }
  Range range(const std::string& key) {
    const auto v = get<std::vector<double>>(key);
    if (v.size() != 2) throw ConfigError("'" + path_ + "." + key + "' must be [lo, hi]");
    return {v[0], v[1]};
  }
  JointLimits limits(const std::string& key) {
    Obj o(at(key), path_ + "." + key);
    return {deg_to_rad(o.get<double>("q1")), deg_to_rad(o.get<double>("q2"))};
  }
  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json env_part(const RunConfig& c) {
  const auto& g = c.geometry;
  const auto& e = c.training_episode;
  const auto& v = c.evaluation;
  const auto& r = c.randomization;
  const auto& t = c.train;
  return {
      {"experiment", to_string(c.experiment)},
      {"geometry",
       {{"base_height", g.base_height},
        {"link_length", g.link_length},
        {"floor_z", g.floor_z},
        {"floor_clearance", g.floor_clearance}}},
      {"training_episode",
       {{"horizon", e.horizon},
        {"dt", e.dt},
        {"max_speed", e.max_speed},
        {"min_target_height", e.min_target_height},
        {"mechanical_limits_deg", limits_deg(e.mechanical_limits)}}},
      {"evaluation",
       {{"n_targets", v.n_targets},
        {"target_seed", v.target_seed},
        {"horizon", v.horizon},
        {"dt", v.dt},
        {"max_speed", v.max_speed},
        {"safety_limits_deg", limits_deg(v.limits)},
        {"min_target_height", v.min_target_height},
        {"target_margin_deg", rad_to_deg(v.target_margin)}}},
      {"randomization",
       {{"latency", range_json(r.latency)},
        {"stiffness", range_json(r.stiffness)},
        {"damping", range_json(r.damping)},
        {"noise", range_json(r.noise)}}},
      {"train",
       {{"n_envs", t.n_envs},
        {"n_steps_per_update", t.n_steps_per_update},
        {"clip_range", t.clip_range},
        {"gamma", t.gamma},
        {"gae_lambda", t.gae_lambda},
        {"learning_rate", t.learning_rate},
        {"linear_lr_decay", t.linear_lr_decay},
        {"epochs_per_update", t.epochs_per_update},
        {"minibatch_size", t.minibatch_size},
        {"value_coef", t.value_coef},
        {"entropy_coef", t.entropy_coef},
        {"max_grad_norm", t.max_grad_norm},
        {"adam_epsilon", t.adam_epsilon},
        {"hidden_sizes", t.hidden_sizes},
        {"log_std_init", t.log_std_init}}},
      {"budgets",
       {{"pretrain", c.budgets.pretrain},
        {"adapt_total", c.budgets.adapt_total},
        {"per_phase", c.budgets.per_phase}}},
      {"measurement_every", c.measurement_every},
  };
}

}  // namespace

json RunConfig::to_json() const {
  json j = env_part(*this);
  const auto& p = pseudo_real;
  j["pseudo_real"] = {{"latency", p.latency},
                      {"stiffness", p.stiffness},
                      {"damping", p.damping},
                      {"noise", p.noise},
                      {"hidden_seed", p.hidden_seed}};
  j["strategy"] = {{"name", to_string(strategy)},
                   {"sequence", sequence ? s2r::to_string(*sequence) : std::string("N/A")}};
  j["seeds"] = seeds;
  j["output_dir"] = output_dir;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  {
    Obj root(j, "config");
    c.experiment = parse_experiment(root.get<std::string>("experiment"));
    {
      Obj g(root.at("geometry"), "geometry");
      c.geometry.base_height = g.get<double>("base_height");
      c.geometry.link_length = g.get<double>("link_length");
      c.geometry.floor_z = g.get<double>("floor_z");
      c.geometry.floor_clearance = g.get<double>("floor_clearance");
    }
    {
      Obj e(root.at("training_episode"), "training_episode");
      c.training_episode.horizon = e.get<int>("horizon");
      c.training_episode.dt = e.get<double>("dt");
      c.training_episode.max_speed = e.get<double>("max_speed");
      c.training_episode.min_target_height = e.get<double>("min_target_height");
      c.training_episode.mechanical_limits = e.limits("mechanical_limits_deg");
      c.training_episode.mode = Mode::training;
    }
    {
      Obj v(root.at("evaluation"), "evaluation");
      c.evaluation.n_targets = v.get<int>("n_targets");
      c.evaluation.target_seed = v.get<std::uint64_t>("target_seed");
      c.evaluation.horizon = v.get<int>("horizon");
      c.evaluation.dt = v.get<double>("dt");
      c.evaluation.max_speed = v.get<double>("max_speed");
      c.evaluation.limits = v.limits("safety_limits_deg");
      c.evaluation.min_target_height = v.get<double>("min_target_height");
      c.evaluation.target_margin = deg_to_rad(v.get<double>("target_margin_deg"));
    }
    {
      Obj r(root.at("randomization"), "randomization");
      c.randomization.latency = r.range("latency");
      c.randomization.stiffness = r.range("stiffness");
      c.randomization.damping = r.range("damping");
      c.randomization.noise = r.range("noise");
    }
    {
      Obj p(root.at("pseudo_real"), "pseudo_real");
      c.pseudo_real.latency = p.get<double>("latency");
      c.pseudo_real.stiffness = p.get<double>("stiffness");
      c.pseudo_real.damping = p.get<double>("damping");
      c.pseudo_real.noise = p.get<double>("noise");
      c.pseudo_real.hidden_seed = p.get<std::uint64_t>("hidden_seed");
    }
    {
      Obj t(root.at("train"), "train");
      auto& tc = c.train;
      tc.n_envs = t.get<int>("n_envs");
      tc.n_steps_per_update = t.get<int>("n_steps_per_update");
      tc.clip_range = t.get<double>("clip_range");
      tc.gamma = t.get<double>("gamma");
      tc.gae_lambda = t.get<double>("gae_lambda");
      tc.learning_rate = t.get<double>("learning_rate");
      tc.linear_lr_decay = t.get<bool>("linear_lr_decay");
      tc.epochs_per_update = t.get<int>("epochs_per_update");
      tc.minibatch_size = t.get<int>("minibatch_size");
      tc.value_coef = t.get<double>("value_coef");
      tc.entropy_coef = t.get<double>("entropy_coef");
      tc.max_grad_norm = t.get<double>("max_grad_norm");
      tc.adam_epsilon = t.get<double>("adam_epsilon");
      tc.hidden_sizes = t.get<std::vector<int>>("hidden_sizes");
      tc.log_std_init = t.get<double>("log_std_init");
    }
    {
      Obj s(root.at("strategy"), "strategy");
      c.strategy = parse_strategy(s.get<std::string>("name"));
      const auto seq = s.get<std::string>("sequence");
      if (seq != "N/A") c.sequence = parse_permutation(seq);
    }
    {
      Obj b(root.at("budgets"), "budgets");
      c.budgets.pretrain = b.get<long long>("pretrain");
      c.budgets.adapt_total = b.get<long long>("adapt_total");
      c.budgets.per_phase = b.get<long long>("per_phase");
    }
    c.measurement_every = root.get<long long>("measurement_every");
    c.seeds = root.get<std::vector<std::uint64_t>>("seeds");
    c.output_dir = root.get<std::string>("output_dir");
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  } catch (const std::system_error& e) {
    throw ConfigError(e.what());
  }
  return from_json(j);
}

std::string RunConfig::env_hash() const { return hex64(fnv1a64(env_part(*this).dump())); }

std::string RunConfig::hash() const {
  json j = env_part(*this);
  const auto& p = pseudo_real;
  j["pseudo_real"] = {{"latency", p.latency},
                      {"stiffness", p.stiffness},
                      {"damping", p.damping},
                      {"noise", p.noise},
                      {"hidden_seed", p.hidden_seed}};
  return hex64(fnv1a64(j.dump()));
}

}  // namespace s2r
