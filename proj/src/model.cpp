#include "entromax/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "entromax/common.hpp"

namespace entromax {

bool ValidationReport::ok() const {
  for (const auto& i : issues)
    if (i.severity == ValidationIssue::Severity::error) return false;
  return true;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& i : issues) {
    out << (i.severity == ValidationIssue::Severity::error ? "error" : "warning")
        << " at " << i.where << ": " << i.message << "\n";
  }
  return out.str();
}

namespace {

void check_row(ValidationReport& rep, const std::string& where,
               const std::vector<double>& row, std::size_t want_size) {
  if (row.size() != want_size) {
    rep.issues.push_back({ValidationIssue::Severity::error, where,
                          "row has " + std::to_string(row.size()) +
                              " entries, expected " + std::to_string(want_size)});
    return;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double v = row[i];
    if (!std::isfinite(v)) {
      rep.issues.push_back({ValidationIssue::Severity::error, where,
                            "entry " + std::to_string(i) + " is not finite"});
      return;
    }
    if (v < -1e-12) {
      rep.issues.push_back({ValidationIssue::Severity::error, where,
                            "entry " + std::to_string(i) + " is negative (" +
                                format_double(v) + ")"});
      return;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    rep.issues.push_back({ValidationIssue::Severity::error, where,
                          "row sums to " + format_double(sum) +
                              ", deviates from 1 beyond 1e-9"});
  }
}

void check_ids(ValidationReport& rep, const std::string& where,
               const std::vector<std::string>& ids) {
  if (ids.empty()) {
    rep.issues.push_back(
        {ValidationIssue::Severity::error, where, "set is empty"});
    return;
  }
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) {
      rep.issues.push_back(
          {ValidationIssue::Severity::error, where, "empty identifier"});
    } else if (!seen.insert(id).second) {
      rep.issues.push_back({ValidationIssue::Severity::error, where,
                            "duplicate identifier '" + id + "'"});
    }
  }
}

}  // namespace

ValidationReport validate_pomdp(const Pomdp& m) {
  ValidationReport rep;
  check_ids(rep, "states", m.states);
  check_ids(rep, "actions", m.actions);
  check_ids(rep, "observations", m.observations);

  const std::size_t S = m.states.size();
  const std::size_t A = m.actions.size();
  const std::size_t Z = m.observations.size();

  if (m.initial < 0 || static_cast<std::size_t>(m.initial) >= S) {
    rep.issues.push_back({ValidationIssue::Severity::error, "start",
                          "initial state index " + std::to_string(m.initial) +
                              " out of range"});
  }
  if (m.transition.size() != S || m.observe.size() != S || m.reward.size() != S) {
    rep.issues.push_back({ValidationIssue::Severity::error, "tables",
                          "transition/observation/reward tables must have one "
                          "entry per state"});
    return rep;
  }
  for (std::size_t s = 0; s < S; ++s) {
    if (m.transition[s].size() != A || m.reward[s].size() != A) {
      rep.issues.push_back({ValidationIssue::Severity::error,
                            "state " + m.states[s],
                            "needs one transition row and one reward per action"});
      continue;
    }
    for (std::size_t a = 0; a < A; ++a) {
      check_row(rep, "T[" + m.states[s] + "][" + m.actions[a] + "]",
                m.transition[s][a], S);
      if (!std::isfinite(m.reward[s][a])) {
        rep.issues.push_back({ValidationIssue::Severity::error,
                              "R[" + m.states[s] + "][" + m.actions[a] + "]",
                              "reward is not finite"});
      }
    }
    check_row(rep, "O[" + m.states[s] + "]", m.observe[s], Z);
  }
  return rep;
}

Pomdp normalized(Pomdp m) {
  auto fix = [](std::vector<double>& row) { renormalize_row(row); };
  for (auto& per_state : m.transition)
    for (auto& row : per_state) fix(row);
  for (auto& row : m.observe) fix(row);
  const ValidationReport rep = validate_pomdp(m);
  if (!rep.ok()) throw ValidationError("invalid model:\n" + rep.summary());
  return m;
}

Pomdp to_fully_observable(const Pomdp& m) {
  Pomdp out = m;
  out.observations = m.states;
  out.observe.assign(m.states.size(),
                     std::vector<double>(m.states.size(), 0.0));
  for (std::size_t s = 0; s < m.states.size(); ++s) out.observe[s][s] = 1.0;
  return out;
}

Pomdp reduce_finite_horizon(const Pomdp& m, int horizon) {
  if (horizon < 1)
    throw ValidationError("reduce_finite_horizon: horizon must be >= 1, got " +
                          std::to_string(horizon));
  const int S = m.num_states();
  const int A = m.num_actions();
  const int n = S * horizon + 1;
  const int sink = S * horizon;

  auto fresh = [](std::string base, const std::vector<std::string>& used) {
    std::set<std::string> taken(used.begin(), used.end());
    while (taken.count(base)) base += "_";
    return base;
  };

  Pomdp out;
  out.actions = m.actions;
  out.states.reserve(n);
  for (int t = 1; t <= horizon; ++t)
    for (int s = 0; s < S; ++s)
      out.states.push_back(m.states[s] + "@" + std::to_string(t));
  out.states.push_back(fresh("sink", out.states));
  out.observations = m.observations;
  out.observations.push_back(fresh("obs_sink", m.observations));
  const int Z = static_cast<int>(out.observations.size());
  out.initial = m.initial;  // (s_I, 1) occupies the first stage block

  out.transition.assign(n, std::vector<std::vector<double>>(
                               A, std::vector<double>(n, 0.0)));
  out.observe.assign(n, std::vector<double>(Z, 0.0));
  out.reward.assign(n, std::vector<double>(A, 0.0));

  for (int t = 1; t <= horizon; ++t) {
    for (int s = 0; s < S; ++s) {
      const int b = (t - 1) * S + s;
      for (int z = 0; z < m.num_observations(); ++z)
        out.observe[b][z] = m.observe[s][z];
      for (int a = 0; a < A; ++a) {
        out.reward[b][a] = m.reward[s][a];
        if (t < horizon) {
          for (int s2 = 0; s2 < S; ++s2)
            out.transition[b][a][t * S + s2] = m.transition[s][a][s2];
        } else {
          out.transition[b][a][sink] = 1.0;
        }
      }
    }
  }
  out.observe[sink][Z - 1] = 1.0;
  for (int a = 0; a < A; ++a) out.transition[sink][a][sink] = 1.0;
  return out;
}

}  // namespace entromax
