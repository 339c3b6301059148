#pragma once

#include <string>
#include <vector>

#include "s2r/strategies.hpp"

// Expected phase lists written out from the strategy definitions, as
// "{...}xBUDGET" strings with parameters in L, T, N order.
inline std::string set_text(const std::string& letters) {
  std::string out = "{";
  for (char c : std::string("LTN")) {
    if (letters.find(c) == std::string::npos) continue;
    if (out.size() > 1) out += ",";
    out += c;
  }
  return out + "}";
}

inline std::vector<std::string> expected_phases(s2r::StrategyName name, const std::string& perm,
                                                long long pre, long long adapt, long long per) {
  using s2r::StrategyName;
  std::vector<std::string> out;
  auto add = [&](const std::string& letters, long long b) {
    out.push_back(set_text(letters) + "x" + std::to_string(b));
  };
  switch (name) {
    case StrategyName::ideal: add("", pre + adapt); break;
    case StrategyName::randomized: add("LTN", pre + adapt); break;
    case StrategyName::ideal2randomized: add("", pre); add("LTN", adapt); break;
    case StrategyName::fine_tuning:
      add("", pre);
      for (char c : perm) add(std::string(1, c), per);
      break;
    case StrategyName::curriculum:
      add("", pre);
      for (std::size_t k = 1; k <= perm.size(); ++k) add(perm.substr(0, k), per);
      break;
    case StrategyName::ik_baseline: break;
  }
  return out;
}

inline std::vector<std::string> actual_phases(const s2r::StrategySchedule& s) {
  std::vector<std::string> out;
  for (const auto& p : s.phases) out.push_back(p.active.to_string() + "x" + std::to_string(p.timestep_budget));
  return out;
}

// Checks every strategy/permutation against the written-out definitions plus
// the structural rules; returns the number of violations.
inline int schedule_violations(const s2r::Budgets& b) {
  using namespace s2r;
  int bad = 0;
  const std::vector<std::string> perms{"TNL", "TLN", "NTL", "NLT", "LTN", "LNT"};
  for (std::size_t i = 0; i < perms.size(); ++i) {
    if (to_string(all_permutations()[i]) != perms[i]) ++bad;
  }
  for (StrategyName name : all_strategies()) {
    const bool needs = name == StrategyName::fine_tuning || name == StrategyName::curriculum;
    if (requires_permutation(name) != needs) ++bad;
    const std::vector<std::string> list = needs ? perms : std::vector<std::string>{""};
    for (const auto& perm : list) {
      std::optional<Permutation> p;
      if (needs) p = parse_permutation(perm);
      const StrategySchedule s = build_schedule(name, p, b);
      if (actual_phases(s) != expected_phases(name, perm, b.pretrain, b.adapt_total, b.per_phase)) ++bad;
      if (name != StrategyName::ik_baseline && s.total_budget() != b.pretrain + b.adapt_total) ++bad;
      for (std::size_t k = 0; k < s.phases.size(); ++k) {
        const bool pre = needs || name == StrategyName::ideal2randomized;
        if (s.phases[k].shared_pretrain != (pre && k == 0)) ++bad;
        if ((s.phases[k].start_from == StartFrom::inherited) != (k > 0)) ++bad;
      }
      if (name == StrategyName::fine_tuning) {
        ParamSet seen;
        for (std::size_t k = 1; k < s.phases.size(); ++k) {
          if (s.phases[k].active.size() != 1 || !(seen & s.phases[k].active).empty()) ++bad;
          seen = seen | s.phases[k].active;
        }
        if (!(seen == ParamSet::all())) ++bad;
      }
      if (name == StrategyName::curriculum) {
        for (std::size_t k = 2; k < s.phases.size(); ++k) {
          if (!s.phases[k].active.contains(s.phases[k - 1].active) ||
              s.phases[k].active.size() != s.phases[k - 1].active.size() + 1) {
            ++bad;
          }
        }
      }
    }
  }
  // 31 : 3 : 3 : 3
  if (b.pretrain * 3 != b.per_phase * 31 || b.adapt_total != 3 * b.per_phase) ++bad;
  return bad;
}
