#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace entromax {

inline constexpr const char* kToolVersion = "1.0.0";

// Record of one CLI invocation: the resolved configuration, content hashes of
// every input, the seed, and the files written.  Wall-clock time is reported
// on stderr only so that reruns with identical inputs produce byte-identical
// outputs.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;  // name -> content hash
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
};

// Stable JSON rendering; equal manifests serialize to equal bytes.
std::string manifest_to_json(const RunManifest& manifest);

// Hash over the serialized manifest.
std::uint64_t manifest_hash(const RunManifest& manifest);

// One-line CSV comment identifying the producing run: "# manifest <hex>".
std::string manifest_comment(const RunManifest& manifest);

}  // namespace entromax
