#include "entromax/result_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "entromax/common.hpp"
#include "entromax/format.hpp"

namespace entromax {
namespace {

using json = nlohmann::ordered_json;

SynthesisStatus status_from_string(const std::string& name) {
  for (auto status :
       {SynthesisStatus::ok, SynthesisStatus::slack_positive,
        SynthesisStatus::iteration_limit, SynthesisStatus::numerical_failure}) {
    if (name == to_string(status)) return status;
  }
  throw ValidationError("unknown synthesis status '" + name + "'");
}

}  // namespace

std::string result_to_json(const SynthesisResult& result) {
  json j;
  j["schema"] = "v1";
  j["status"] = to_string(result.status);
  j["feasible"] = result.feasible;
  j["entropy_bits"] = result.entropy_bits;
  j["reward"] = result.reward;
  j["slack_sum"] = result.slack_sum;
  j["iterations"] = result.iterations;
  j["restart_index"] = result.restart_index;
  j["seed"] = hex64(result.seed);
  j["structure"] = {{"k", result.structure.k},
                    {"successor", result.structure.successor}};
  j["gamma"] = result.instantiation.gamma;
  json trace = json::array();
  for (const auto& t : result.trace) {
    trace.push_back({{"iteration", t.iteration},
                     {"val", t.val},
                     {"entropy_bits", t.entropy_bits},
                     {"reward", t.reward},
                     {"slack_sum", t.slack_sum},
                     {"tau", t.tau}});
  }
  j["trace"] = trace;
  return j.dump(2) + "\n";
}

SynthesisResult result_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, static_cast<int>(e.byte), e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "v1") {
      throw ValidationError("unsupported result schema '" +
                            j.at("schema").get<std::string>() + "'");
    }
    SynthesisResult r;
    r.status = status_from_string(j.at("status").get<std::string>());
    r.feasible = j.at("feasible").get<bool>();
    r.entropy_bits = j.at("entropy_bits").get<double>();
    r.reward = j.at("reward").get<double>();
    r.slack_sum = j.at("slack_sum").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.restart_index = j.at("restart_index").get<int>();
    r.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
    r.structure.k = j.at("structure").at("k").get<int>();
    r.structure.successor =
        j.at("structure").at("successor").get<std::vector<int>>();
    r.instantiation.gamma =
        j.at("gamma")
            .get<std::vector<std::vector<std::vector<double>>>>();
    for (const auto& t : j.at("trace")) {
      IterationTrace entry;
      entry.iteration = t.at("iteration").get<int>();
      entry.val = t.at("val").get<double>();
      entry.entropy_bits = t.at("entropy_bits").get<double>();
      entry.reward = t.at("reward").get<double>();
      entry.slack_sum = t.at("slack_sum").get<double>();
      entry.tau = t.at("tau").get<double>();
      r.trace.push_back(entry);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("not a v1 synthesis result: ") +
                          e.what());
  }
}

void save_result(const std::string& path, const SynthesisResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open result file '" + path + "'");
  out << result_to_json(result);
}

SynthesisResult load_result(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open result file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return result_from_json(buffer.str());
}

}  // namespace entromax
