#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entromax/common.hpp"
#include "entromax/evaluation.hpp"
#include "entromax/format.hpp"
#include "entromax/fsc.hpp"
#include "entromax/generators.hpp"
#include "entromax/manifest.hpp"
#include "entromax/mdp_bound.hpp"
#include "entromax/model.hpp"
#include "entromax/pmc.hpp"
#include "entromax/result_io.hpp"
#include "entromax/synthesis.hpp"

namespace {

using namespace entromax;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Bad flag combinations discovered after CLI11's own parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  out << content;
}

/// Prints elapsed time on stderr when a command finishes. Kept off stdout
/// and out of the manifest so reruns stay byte-identical.
struct WallClock {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  ~WallClock() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cerr << "wall_clock_seconds " << seconds << "\n";
  }
};

struct LoadedModel {
  Pomdp model;
  std::uint64_t hash = 0;  // over the builtin's serialization or file bytes
};

LoadedModel load_model(const std::string& spec) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) {
    Pomdp m = builtin_model(spec);
    const std::uint64_t hash = fnv1a64(serialize_pomdp(m));
    return {std::move(m), hash};
  }
  const std::string text = read_file(spec);
  return {parse_pomdp(text), fnv1a64(text)};
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw UsageError("--beta must lie in (0, 1]");
}

std::string gamma_table_path(const std::string& out) {
  const std::string suffix = ".json";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out.substr(0, out.size() - suffix.size()) + ".gamma";
  }
  return out + ".gamma";
}

/// States named c<col>r<row> (the grid generators) get explicit coordinates
/// in occupancy tables so the CSV plots directly as a heatmap.
bool grid_coords(const std::string& name, int* col, int* row) {
  if (name.size() < 4 || name[0] != 'c') return false;
  const auto split = name.find('r', 1);
  if (split == std::string::npos) return false;
  const char* begin = name.data();
  auto [p1, e1] = std::from_chars(begin + 1, begin + split, *col);
  if (e1 != std::errc() || p1 != begin + split) return false;
  auto [p2, e2] = std::from_chars(begin + split + 1, begin + name.size(), *row);
  return e2 == std::errc() && p2 == begin + name.size();
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
  } else {
    write_file(out, content);
  }
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const std::string& path) {
  const Pomdp m = parse_pomdp_file(path);
  const ValidationReport report = validate_pomdp(m);
  std::cout << report.summary();
  if (!report.ok()) return 1;
  std::cout << "ok: " << m.num_states() << " states, " << m.num_actions()
            << " actions, " << m.num_observations() << " observations\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string model;
  int k = 1;
  double beta = 0.95;
  bool beta_given = false;
  double gamma = 0.0;
  bool has_gamma = false;
  int horizon = 0;
  bool has_horizon = false;
  int restarts = 10;
  std::uint64_t seed = 1;
  bool baseline = false;
  std::string out = "result.json";
};

int run_synth(const SynthArgs& a) {
  WallClock clock;
  check_beta(a.beta);
  if (a.has_horizon && a.beta_given && a.beta != 1.0)
    throw UsageError("--horizon fixes beta = 1; drop --beta or set it to 1");
  if (a.baseline && !a.has_gamma)
    throw UsageError("--baseline needs --gamma: without a reward threshold "
                     "the feasibility run has nothing to satisfy");
  const LoadedModel loaded = load_model(a.model);
  Pomdp m = loaded.model;
  double beta = a.beta;
  if (a.has_horizon) {
    m = reduce_finite_horizon(m, a.horizon);
    beta = 1.0;
  }

  SynthesisConfig cfg;
  cfg.beta = beta;
  if (a.has_gamma) cfg.gamma_threshold = a.gamma;
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  const InducedPmc pmc = build_pmc(m, chain_memory_structure(a.k));

  RunManifest man;
  man.command = "synth";
  man.config = {
      {"model", a.model},
      {"k", std::to_string(a.k)},
      {"beta", format_double(beta)},
      {"gamma", a.has_gamma ? format_double(a.gamma) : "none"},
      {"horizon", a.has_horizon ? std::to_string(a.horizon) : "none"},
      {"restarts", std::to_string(a.restarts)},
      {"baseline", a.baseline ? "true" : "false"},
  };
  man.inputs = {{"model", hex64(loaded.hash)}};
  man.seed = a.seed;
  const std::string gamma_path = gamma_table_path(a.out);
  man.outputs = {a.out, gamma_path};

  try {
    const SynthesisResult res =
        a.baseline ? synth_feasibility(pmc, cfg) : synth_with_restarts(pmc, cfg);
    auto j = nlohmann::ordered_json::parse(result_to_json(res));
    j["manifest"] = nlohmann::ordered_json::parse(manifest_to_json(man));
    write_file(a.out, j.dump(2) + "\n");
    write_file(gamma_path, manifest_comment(man) + "\n" +
                               serialize_gamma(res.instantiation));
    std::cout << "entropy_bits " << format_double(res.entropy_bits) << "\n"
              << "reward " << format_double(res.reward) << "\n"
              << "status " << to_string(res.status) << "\n";
    return 0;
  } catch (const AllRestartsFailed& e) {
    nlohmann::ordered_json j;
    j["schema"] = "v1";
    j["error"] = "all_restarts_failed";
    j["message"] = e.what();
    j["manifest"] = nlohmann::ordered_json::parse(manifest_to_json(man));
    write_file(a.out, j.dump(2) + "\n");
    std::cerr << e.what() << "\n";
    return 3;
  }
}

// ---------------------------------------------------------------------------
// bound

struct BoundArgs {
  std::string model;
  double beta = 0.95;
  bool has_beta = false;
  int horizon = 0;
  bool has_horizon = false;
  double gamma = 0.0;
  bool has_gamma = false;
  int restarts = 10;
  std::uint64_t seed = 1;
};

int run_bound(const BoundArgs& a) {
  WallClock clock;
  if (a.has_beta == a.has_horizon)
    throw UsageError("pass exactly one of --beta or --horizon");
  if (a.has_beta) check_beta(a.beta);
  const LoadedModel loaded = load_model(a.model);
  Pomdp m = loaded.model;
  double beta = a.beta;
  if (a.has_horizon) {
    m = reduce_finite_horizon(m, a.horizon);
    beta = 1.0;
  }
  if (a.has_gamma) {
    SynthesisConfig cfg;
    cfg.restarts = a.restarts;
    cfg.seed = a.seed;
    const SynthesisResult res =
        max_entropy_mdp_constrained(m, beta, a.gamma, cfg);
    std::cout << "bound_bits " << format_double(res.entropy_bits) << "\n"
              << "reward " << format_double(res.reward) << "\n";
  } else {
    const MdpBoundResult res = max_entropy_mdp(m, beta);
    std::cout << "bound_bits " << format_double(res.bound) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string model;
  std::string kind;  // gamma | k | horizon
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  bool has_step = false;
  int k = 1;
  double beta = 0.95;
  bool beta_given = false;
  int horizon = 0;
  bool has_horizon = false;
  double gamma = 0.0;
  bool has_gamma = false;
  int restarts = 10;
  std::uint64_t seed = 1;
  std::string out;  // empty = stdout
  int jobs = 0;     // 0 = hardware concurrency
};

struct SweepRow {
  std::string x;
  std::string entropy = "nan";
  std::string reward = "nan";
  std::string status = "error";
  std::string seed;
};

SweepRow run_point(const std::string& x, const InducedPmc& pmc,
                   const SynthesisConfig& cfg) {
  SweepRow row;
  row.x = x;
  row.seed = hex64(cfg.seed);
  try {
    const SynthesisResult res = synth_with_restarts(pmc, cfg);
    row.entropy = format_double(res.entropy_bits);
    row.reward = format_double(res.reward);
    row.status = to_string(res.status);
    row.seed = hex64(res.seed);
  } catch (const AllRestartsFailed&) {
    row.status = "infeasible";
  } catch (const SolverFailure&) {
    row.status = "solver_failure";
  } catch (const std::exception&) {
    row.status = "error";
  }
  return row;
}

void run_parallel(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
  unsigned threads = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) work(i);
    });
  }
  for (auto& t : pool) t.join();
}

int run_sweep(const SweepArgs& a) {
  WallClock clock;
  const bool sweep_gamma = a.kind == "gamma";
  const bool sweep_k = a.kind == "k";
  const bool sweep_horizon = a.kind == "horizon";
  if (!sweep_gamma && !sweep_k && !sweep_horizon)
    throw UsageError("--sweep must be one of gamma, k, horizon");
  if (sweep_gamma && a.has_gamma)
    throw UsageError("--gamma is the swept variable here; use --from/--to");
  if (sweep_horizon && a.has_horizon)
    throw UsageError("--horizon is the swept variable here; use --from/--to");
  if (sweep_horizon && a.beta_given && a.beta != 1.0)
    throw UsageError("a horizon sweep fixes beta = 1; drop --beta");
  if (!sweep_horizon && a.has_horizon && a.beta_given && a.beta != 1.0)
    throw UsageError("--horizon fixes beta = 1; drop --beta or set it to 1");
  const double step = a.has_step ? a.step : (sweep_gamma ? 0.1 : 1.0);
  if (!(step > 0.0) || a.to < a.from)
    throw UsageError("need --from <= --to and --step > 0");
  if (a.beta_given) check_beta(a.beta);

  const LoadedModel loaded = load_model(a.model);
  Pomdp m = loaded.model;
  double beta = a.beta;
  if (a.has_horizon) {
    m = reduce_finite_horizon(m, a.horizon);
    beta = 1.0;
  }

  SynthesisConfig base;
  base.beta = beta;
  if (a.has_gamma) base.gamma_threshold = a.gamma;
  base.restarts = a.restarts;
  base.seed = a.seed;

  std::vector<double> xs;
  for (double x = a.from; x <= a.to + 1e-9; x += step) xs.push_back(x);

  std::vector<SweepRow> rows(xs.size());
  if (sweep_gamma) {
    const InducedPmc pmc = build_pmc(m, chain_memory_structure(a.k));
    run_parallel(xs.size(), a.jobs, [&](std::size_t i) {
      SynthesisConfig cfg = base;
      cfg.gamma_threshold = xs[i];
      cfg.seed = derive_seed(a.seed, i);
      rows[i] = run_point(format_double(xs[i]), pmc, cfg);
    });
  } else if (sweep_horizon) {
    run_parallel(xs.size(), a.jobs, [&](std::size_t i) {
      const int horizon = static_cast<int>(std::llround(xs[i]));
      SynthesisConfig cfg = base;
      cfg.beta = 1.0;
      cfg.seed = derive_seed(a.seed, i);
      const Pomdp reduced = reduce_finite_horizon(m, horizon);
      const InducedPmc pmc = build_pmc(reduced, chain_memory_structure(a.k));
      rows[i] = run_point(std::to_string(horizon), pmc, cfg);
    });
  } else {
    std::vector<int> ks;
    for (double x : xs) ks.push_back(static_cast<int>(std::llround(x)));
    std::vector<SynthesisResult> results;
    std::string failure = "infeasible";
    try {
      results = memory_sweep(m, ks, base, -kInf);
    } catch (const AllRestartsFailed&) {
    } catch (const SolverFailure&) {
      failure = "solver_failure";
    }
    std::map<int, const SynthesisResult*> by_k;
    for (const auto& r : results) by_k[r.structure.k] = &r;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      SweepRow& row = rows[i];
      row.x = std::to_string(ks[i]);
      if (auto it = by_k.find(ks[i]); it != by_k.end()) {
        row.entropy = format_double(it->second->entropy_bits);
        row.reward = format_double(it->second->reward);
        row.status = to_string(it->second->status);
        row.seed = hex64(it->second->seed);
      } else {
        row.status = failure;
        row.seed = hex64(a.seed);
      }
    }
  }

  RunManifest man;
  man.command = "sweep";
  man.config = {
      {"model", a.model},
      {"sweep", a.kind},
      {"from", format_double(a.from)},
      {"to", format_double(a.to)},
      {"step", format_double(step)},
      {"k", std::to_string(a.k)},
      {"beta", a.has_horizon || sweep_horizon ? "1" : format_double(beta)},
      {"horizon", a.has_horizon ? std::to_string(a.horizon) : "none"},
      {"gamma", a.has_gamma ? format_double(a.gamma) : "none"},
      {"restarts", std::to_string(a.restarts)},
  };
  man.inputs = {{"model", hex64(loaded.hash)}};
  man.seed = a.seed;
  man.outputs = {a.out.empty() ? "-" : a.out};

  std::ostringstream csv;
  csv << manifest_comment(man) << "\n";
  csv << a.kind << ",entropy_bits,reward,status,seed\n";
  for (const auto& row : rows) {
    csv << row.x << ',' << row.entropy << ',' << row.reward << ','
        << row.status << ',' << row.seed << "\n";
  }
  emit(a.out, csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// occupancy

struct OccupancyArgs {
  std::string model;
  std::string controller;
  double beta = 0.95;
  bool has_beta = false;
  int horizon = 0;
  bool has_horizon = false;
  std::string out;  // empty = stdout
};

int run_occupancy(const OccupancyArgs& a) {
  WallClock clock;
  if (a.has_beta == a.has_horizon)
    throw UsageError("pass exactly one of --beta or --horizon");
  if (a.has_beta) check_beta(a.beta);
  const LoadedModel loaded = load_model(a.model);
  const std::string controller_text = read_file(a.controller);
  const SynthesisResult ctrl = result_from_json(controller_text);

  const auto report =
      check_well_defined(ctrl.instantiation, ctrl.structure,
                         loaded.model.num_observations(),
                         loaded.model.num_actions());
  if (!report.ok) {
    throw ValidationError("controller rows leave the action simplex "
                          "(worst residual " +
                          format_double(report.max_residual) + ")");
  }
  const InducedPmc pmc = build_pmc(loaded.model, ctrl.structure);
  const MarkovChain chain =
      instantiate(pmc, ctrl.instantiation, RewardConvention::current);
  const OccupancyTable occ = a.has_horizon
                                 ? occupancy_horizon(chain, a.horizon)
                                 : occupancy_discounted(chain, a.beta);
  const std::vector<double> visits = marginalize_memory(pmc, occ.visits);

  RunManifest man;
  man.command = "occupancy";
  man.config = {
      {"model", a.model},
      {"controller", a.controller},
      {"beta", a.has_beta ? format_double(a.beta) : "1"},
      {"horizon", a.has_horizon ? std::to_string(a.horizon) : "none"},
  };
  man.inputs = {{"model", hex64(loaded.hash)},
                {"controller", hex64(fnv1a64(controller_text))}};
  man.outputs = {a.out.empty() ? "-" : a.out};

  std::ostringstream csv;
  csv << manifest_comment(man) << "\n";
  csv << "state,col,row,visits\n";
  for (int s = 0; s < loaded.model.num_states(); ++s) {
    int col = 0, row = 0;
    csv << loaded.model.states[s] << ',';
    if (grid_coords(loaded.model.states[s], &col, &row)) {
      csv << col << ',' << row;
    } else {
      csv << ',';
    }
    csv << ',' << format_double(visits[s]) << "\n";
  }
  emit(a.out, csv.str());
  return 0;
}

// ---------------------------------------------------------------------------
// gen

int run_gen(const std::string& name, std::string out) {
  if (out.empty()) out = name + ".pomdp";
  const Pomdp m = builtin_model(name);
  const std::string text = serialize_pomdp(m);
  RunManifest man;
  man.command = "gen";
  man.config = {{"name", name}};
  man.inputs = {{"model", hex64(fnv1a64(text))}};
  man.outputs = {out};
  write_file(out, manifest_comment(man) + "\n" + text);
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int guarded(const std::function<int()>& action) {
  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 5;
  } catch (const ParseError& e) {
    std::cerr << "parse error at " << e.line() << ":" << e.column() << ": "
              << e.what();
    if (!e.expected().empty()) {
      std::cerr << " (expected";
      for (const auto& t : e.expected()) std::cerr << " " << t;
      std::cerr << ")";
    }
    std::cerr << "\n";
    return 2;
  } catch (const AllRestartsFailed& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const DivergentEntropy& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const DivergentReward& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const SolverFailure& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "entromax: randomized finite-state controllers that maximize the "
      "entropy of the visited-state process under a reward bound"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::function<int()> action;

  // validate
  {
    auto* cmd = app.add_subcommand("validate", "Parse and check a model file");
    auto path = std::make_shared<std::string>();
    cmd->add_option("model", *path, "model file")->required();
    cmd->callback([path, &action] {
      action = [path] { return run_validate(*path); };
    });
  }

  // synth
  {
    auto* cmd = app.add_subcommand(
        "synth", "Synthesize an entropy-maximizing controller");
    auto a = std::make_shared<SynthArgs>();
    cmd->add_option("model", a->model, "model file or builtin name")
        ->required();
    cmd->add_option("--k", a->k, "controller memory size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto* beta = cmd->add_option("--beta", a->beta, "discount factor")
                     ->capture_default_str();
    auto* gamma =
        cmd->add_option("--gamma", a->gamma, "reward lower bound");
    auto* horizon =
        cmd->add_option("--horizon", a->horizon,
                        "finite horizon (absorbing reduction, beta = 1)")
            ->check(CLI::PositiveNumber);
    cmd->add_option("--restarts", a->restarts, "random restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", a->seed, "base random seed")
        ->envname("ENTROMAX_SEED")
        ->capture_default_str();
    cmd->add_flag("--baseline", a->baseline,
                  "feasibility-only controller (no entropy objective)");
    cmd->add_option("--out", a->out, "result JSON path")
        ->capture_default_str();
    cmd->callback([a, beta, gamma, horizon, &action] {
      a->beta_given = beta->count() > 0;
      a->has_gamma = gamma->count() > 0;
      a->has_horizon = horizon->count() > 0;
      action = [a] { return run_synth(*a); };
    });
  }

  // bound
  {
    auto* cmd = app.add_subcommand(
        "bound", "Fully observable entropy upper bound");
    auto a = std::make_shared<BoundArgs>();
    cmd->add_option("model", a->model, "model file or builtin name")
        ->required();
    auto* beta = cmd->add_option("--beta", a->beta, "discount factor");
    auto* horizon =
        cmd->add_option("--horizon", a->horizon,
                        "finite horizon (absorbing reduction, beta = 1)")
            ->check(CLI::PositiveNumber);
    auto* gamma = cmd->add_option("--gamma", a->gamma,
                                  "reward lower bound (constrained bound)");
    cmd->add_option("--restarts", a->restarts,
                    "restarts for the constrained bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", a->seed, "base random seed")
        ->envname("ENTROMAX_SEED")
        ->capture_default_str();
    cmd->callback([a, beta, horizon, gamma, &action] {
      a->has_beta = beta->count() > 0;
      a->has_horizon = horizon->count() > 0;
      a->has_gamma = gamma->count() > 0;
      action = [a] { return run_bound(*a); };
    });
  }

  // sweep
  {
    auto* cmd = app.add_subcommand(
        "sweep", "Synthesize along a parameter range, emit CSV");
    auto a = std::make_shared<SweepArgs>();
    cmd->add_option("model", a->model, "model file or builtin name")
        ->required();
    cmd->add_option("--sweep", a->kind, "swept variable: gamma, k, horizon")
        ->required();
    cmd->add_option("--from", a->from, "range start")->required();
    cmd->add_option("--to", a->to, "range end")->required();
    auto* step = cmd->add_option("--step", a->step,
                                 "range step (default 0.1 for gamma, else 1)");
    cmd->add_option("--k", a->k, "controller memory size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto* beta = cmd->add_option("--beta", a->beta, "discount factor")
                     ->capture_default_str();
    auto* horizon =
        cmd->add_option("--horizon", a->horizon,
                        "finite horizon (absorbing reduction, beta = 1)")
            ->check(CLI::PositiveNumber);
    auto* gamma =
        cmd->add_option("--gamma", a->gamma, "reward lower bound");
    cmd->add_option("--restarts", a->restarts, "random restarts per point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", a->seed, "base random seed")
        ->envname("ENTROMAX_SEED")
        ->capture_default_str();
    cmd->add_option("--out", a->out, "CSV path (default: stdout)");
    cmd->add_option("--jobs", a->jobs,
                    "parallel sweep points (0 = hardware threads)")
        ->check(CLI::NonNegativeNumber);
    cmd->callback([a, step, beta, horizon, gamma, &action] {
      a->has_step = step->count() > 0;
      a->beta_given = beta->count() > 0;
      a->has_horizon = horizon->count() > 0;
      a->has_gamma = gamma->count() > 0;
      action = [a] { return run_sweep(*a); };
    });
  }

  // occupancy
  {
    auto* cmd = app.add_subcommand(
        "occupancy", "Expected visit counts under a synthesized controller");
    auto a = std::make_shared<OccupancyArgs>();
    cmd->add_option("model", a->model, "model file or builtin name")
        ->required();
    cmd->add_option("controller", a->controller, "result JSON from synth")
        ->required();
    auto* beta = cmd->add_option("--beta", a->beta, "discount factor");
    auto* horizon = cmd->add_option("--horizon", a->horizon, "stage count")
                        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", a->out, "CSV path (default: stdout)");
    cmd->callback([a, beta, horizon, &action] {
      a->has_beta = beta->count() > 0;
      a->has_horizon = horizon->count() > 0;
      action = [a] { return run_occupancy(*a); };
    });
  }

  // gen
  {
    auto* cmd = app.add_subcommand("gen", "Write a builtin model to a file");
    auto name = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    std::string help = "builtin name (";
    for (const auto& n : builtin_names()) help += n + " ";
    help.back() = ')';
    cmd->add_option("name", *name, help)->required();
    cmd->add_option("--out", *out, "output path (default: <name>.pomdp)");
    cmd->callback([name, out, &action] {
      action = [name, out] { return run_gen(*name, *out); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 5;
  }
  return guarded(action);
}
