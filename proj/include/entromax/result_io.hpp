#pragma once

#include <string>

#include "entromax/synthesis.hpp"

namespace entromax {

/// JSON serialization of synthesis results, schema "v1". Doubles use their
/// shortest round-trip form, so write/read/write is byte-stable.
std::string result_to_json(const SynthesisResult& result);

/// Throws ParseError on malformed JSON and ValidationError when the
/// document is well-formed but not a v1 result.
SynthesisResult result_from_json(const std::string& text);

void save_result(const std::string& path, const SynthesisResult& result);
SynthesisResult load_result(const std::string& path);

}  // namespace entromax
