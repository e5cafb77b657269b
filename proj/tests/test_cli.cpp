#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "entromax/format.hpp"
#include "entromax/fsc.hpp"
#include "entromax/model.hpp"
#include "entromax/result_io.hpp"
#include "oracles.hpp"

using namespace entromax;
using oracles::run_cli;

namespace {

std::filesystem::path tmp_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("entromax_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string tmp_path(const std::string& name) {
  return (tmp_dir() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(out.good());
}

struct CsvTable {
  std::string manifest_line;
  std::string header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  t.manifest_line = line;
  REQUIRE(std::getline(in, line));
  t.header = line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    // A trailing empty cell is dropped by getline; normalize.
    while (cells.size() < 4) cells.push_back("");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace

TEST_CASE("gen writes a manifest-stamped model that validates") {
  const std::string path = tmp_path("fig5.pomdp");
  const auto gen = run_cli("gen fig5 --out " + path);
  REQUIRE(gen.code == 0);
  CHECK(gen.out.find("wrote " + path) != std::string::npos);
  const std::string text = slurp(path);
  CHECK(text.rfind("# manifest ", 0) == 0);

  const auto val = run_cli("validate " + path);
  CHECK(val.code == 0);
  CHECK(val.out.rfind("ok:", 0) == 0);
  CHECK(val.out.find("6 states") != std::string::npos);
}

TEST_CASE("validate distinguishes parse errors from bad numbers") {
  const std::string truncated = tmp_path("truncated.pomdp");
  spit(truncated, "states: s0 s1\nactions: a\n");
  const auto parse = run_cli("validate " + truncated);
  CHECK(parse.code == 2);
  CHECK(parse.err.find("parse error at") != std::string::npos);

  Pomdp bad;
  bad.states = {"s0", "s1"};
  bad.actions = {"a"};
  bad.observations = {"z"};
  bad.initial = 0;
  bad.transition = {{{0.4, 0.4}}, {{0.0, 1.0}}};  // first row sums to 0.8
  bad.observe = {{1.0}, {1.0}};
  bad.reward = {{0.0}, {0.0}};
  const std::string semantic = tmp_path("undernormalized.pomdp");
  spit(semantic, serialize_pomdp(bad));
  const auto sem = run_cli("validate " + semantic);
  CHECK(sem.code == 1);

  const auto missing = run_cli("validate " + tmp_path("does_not_exist"));
  CHECK(missing.code == 1);
}

TEST_CASE("synth writes the result, the decision table, and a summary") {
  const std::string out = tmp_path("fig5_result.json");
  const auto r = run_cli("synth fig5 --k 2 --gamma 0.5 --horizon 3 "
                         "--restarts 5 --seed 7 --out " + out);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("entropy_bits ") != std::string::npos);
  CHECK(r.out.find("reward ") != std::string::npos);
  CHECK(r.out.find("status ok") != std::string::npos);
  CHECK(r.err.find("wall_clock_seconds") != std::string::npos);

  const SynthesisResult res = load_result(out);
  CHECK(res.feasible);
  CHECK(res.reward >= 0.5 - 1e-6);
  CHECK(res.entropy_bits >= 1.9);
  CHECK(res.entropy_bits <= 2.05);
  CHECK(res.structure.k == 2);
  CHECK(slurp(out).find("\"manifest\"") != std::string::npos);

  const std::string table = slurp(tmp_path("fig5_result.gamma"));
  CHECK(table.rfind("# manifest ", 0) == 0);
  const Instantiation u = parse_gamma(table);
  CHECK(u.gamma == res.instantiation.gamma);
}

TEST_CASE("synth reruns are byte-identical") {
  const std::string out = tmp_path("rerun.json");
  const std::string cmd = "synth fig5 --k 2 --gamma 0.7 --horizon 3 "
                          "--restarts 3 --seed 11 --out " + out;
  const auto first = run_cli(cmd);
  REQUIRE(first.code == 0);
  const std::string json1 = slurp(out);
  const std::string gamma1 = slurp(tmp_path("rerun.gamma"));

  const auto second = run_cli(cmd);
  REQUIRE(second.code == 0);
  CHECK(slurp(out) == json1);
  CHECK(slurp(tmp_path("rerun.gamma")) == gamma1);
  CHECK(second.out == first.out);  // wall clock goes to stderr only
}

TEST_CASE("an unreachable threshold exits as infeasible") {
  const std::string out = tmp_path("infeasible.json");
  const auto r = run_cli("synth fig5 --k 2 --gamma 2 --horizon 3 "
                         "--restarts 2 --out " + out);
  CHECK(r.code == 3);
  CHECK(!r.err.empty());
  const std::string text = slurp(out);
  CHECK(text.find("all_restarts_failed") != std::string::npos);
  CHECK(text.find("\"manifest\"") != std::string::npos);
}

TEST_CASE("usage errors exit with code five") {
  CHECK(run_cli("synth fig5 --beta 0.5 --horizon 3 --out " +
                tmp_path("x.json")).code == 5);
  CHECK(run_cli("bound fig5").code == 5);
  CHECK(run_cli("bound fig5 --beta 0.9 --horizon 3").code == 5);
  CHECK(run_cli("occupancy fig5 " + tmp_path("none.json")).code == 5);
  CHECK(run_cli("frobnicate").code == 5);
  CHECK(run_cli("sweep fig5 --sweep nonsense --from 0 --to 1").code == 5);
  CHECK(run_cli("sweep fig5 --sweep gamma --from 1 --to 0").code == 5);
}

TEST_CASE("bound reports the fully observable ceiling") {
  const auto plain = run_cli("bound fig5 --horizon 3");
  REQUIRE(plain.code == 0);
  std::istringstream out(plain.out);
  std::string key;
  double value = 0.0;
  REQUIRE((out >> key >> value));
  CHECK(key == "bound_bits");
  CHECK(value == doctest::Approx(2.0).epsilon(1e-4));

  const auto constrained =
      run_cli("bound fig5 --horizon 3 --gamma 1.0 --restarts 3 --seed 5");
  REQUIRE(constrained.code == 0);
  std::istringstream cout_stream(constrained.out);
  double bound = 0.0, reward = 0.0;
  REQUIRE((cout_stream >> key >> bound));
  CHECK(key == "bound_bits");
  REQUIRE((cout_stream >> key >> reward));
  CHECK(key == "reward");
  CHECK(reward >= 1.0 - 1e-6);
  CHECK(bound == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gamma sweeps are parallel-invariant") {
  const std::string out = tmp_path("gamma_sweep.csv");
  const std::string base = "sweep fig5 --sweep gamma --from 0.5 --to 1 "
                           "--step 0.25 --horizon 3 --k 2 --restarts 3 "
                           "--seed 7 --out " + out;
  const auto serial = run_cli(base + " --jobs 1");
  REQUIRE(serial.code == 0);
  const std::string bytes = slurp(out);

  const auto parallel = run_cli(base + " --jobs 2");
  REQUIRE(parallel.code == 0);
  CHECK(slurp(out) == bytes);

  const CsvTable t = parse_csv(bytes);
  CHECK(t.manifest_line.rfind("# manifest ", 0) == 0);
  CHECK(t.header == "gamma,entropy_bits,reward,status,seed");
  REQUIRE(t.rows.size() == 3);
  for (const auto& row : t.rows) CHECK(row[3] == "ok");
  const double first = std::stod(t.rows[0][1]);
  const double last = std::stod(t.rows[2][1]);
  CHECK(first == doctest::Approx(2.0).epsilon(0.05));
  CHECK(last == doctest::Approx(1.0).epsilon(0.05));
  CHECK(first >= std::stod(t.rows[1][1]));
  CHECK(std::stod(t.rows[1][1]) >= last);
}

TEST_CASE("memory sweeps report one row per size") {
  const std::string out = tmp_path("k_sweep.csv");
  const auto r = run_cli("sweep fig7 --sweep k --from 1 --to 3 --beta 1 "
                         "--gamma 1 --restarts 3 --seed 5 --out " + out);
  REQUIRE(r.code == 0);
  const CsvTable t = parse_csv(slurp(out));
  CHECK(t.header == "k,entropy_bits,reward,status,seed");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][0] == "1");
  CHECK(t.rows[1][0] == "2");
  CHECK(t.rows[2][0] == "3");
  double prev = -1.0;
  for (const auto& row : t.rows) {
    CHECK(row[3] == "ok");
    const double e = std::stod(row[1]);
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(std::stod(t.rows[0][1]) <= 1e-6);
}

TEST_CASE("occupancy folds a synthesized controller over the model") {
  const std::string ctrl = tmp_path("fig5_b09.json");
  REQUIRE(run_cli("synth fig5 --k 1 --beta 0.9 --restarts 2 --seed 3 --out " +
                  ctrl).code == 0);
  const std::string out = tmp_path("fig5_occ.csv");
  const auto r = run_cli("occupancy fig5 " + ctrl + " --beta 0.9 --out " + out);
  REQUIRE(r.code == 0);
  const CsvTable t = parse_csv(slurp(out));
  CHECK(t.header == "state,col,row,visits");
  REQUIRE(t.rows.size() == 6);
  double total = 0.0;
  for (const auto& row : t.rows) {
    CHECK(row[1].empty());  // fig5 states carry no grid coordinates
    CHECK(row[2].empty());
    total += std::stod(row[3]);
  }
  CHECK(total == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("occupancy labels grid states with their coordinates") {
  const std::string ctrl = tmp_path("grid4_b09.json");
  REQUIRE(run_cli("synth grid4 --k 1 --beta 0.9 --restarts 2 --seed 3 --out " +
                  ctrl).code == 0);
  const std::string out = tmp_path("grid4_occ.csv");
  const auto r = run_cli("occupancy grid4 " + ctrl + " --beta 0.9 --out " +
                         out);
  REQUIRE(r.code == 0);
  const CsvTable t = parse_csv(slurp(out));
  REQUIRE(t.rows.size() == 16);
  bool found_start = false;
  double total = 0.0;
  for (const auto& row : t.rows) {
    if (row[0] == "c1r4") {
      found_start = true;
      CHECK(row[1] == "1");
      CHECK(row[2] == "4");
      CHECK(std::stod(row[3]) >= 1.0);  // the start state is always visited
    }
    total += std::stod(row[3]);
  }
  CHECK(found_start);
  CHECK(total == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("the environment can provide the default seed") {
  ::setenv("ENTROMAX_SEED", "42", 1);
  const std::string out = tmp_path("env_seed.json");
  const auto r = run_cli("synth fig5 --k 1 --beta 0.9 --restarts 2 --out " +
                         out);
  ::unsetenv("ENTROMAX_SEED");
  REQUIRE(r.code == 0);
  CHECK(slurp(out).find("\"seed\": \"000000000000002a\"") !=
        std::string::npos);
}

TEST_CASE("gen rejects names it does not know") {
  const auto r = run_cli("gen nosuchmodel --out " + tmp_path("nope.pomdp"));
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
}

TEST_CASE("the version flag prints and exits cleanly") {
  const auto r = run_cli("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("1.0.0") != std::string::npos);
}
