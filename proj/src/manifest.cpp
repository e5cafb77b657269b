#include "entromax/manifest.hpp"

#include <json.hpp>

#include "entromax/common.hpp"

namespace entromax {

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["tool_version"] = manifest.tool_version;
  j["command"] = manifest.command;
  j["config"] = manifest.config;  // std::map keeps keys sorted
  j["inputs"] = manifest.inputs;
  j["seed"] = hex64(manifest.seed);
  j["outputs"] = manifest.outputs;
  return j.dump(2);
}

std::uint64_t manifest_hash(const RunManifest& manifest) {
  return fnv1a64(manifest_to_json(manifest));
}

std::string manifest_comment(const RunManifest& manifest) {
  return "# manifest " + hex64(manifest_hash(manifest));
}

}  // namespace entromax
