#pragma once

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "entromax/model.hpp"

namespace entromax {

/// Deterministic memory skeleton of a finite-state controller: memory states
/// 0..k-1 with exactly one successor each; memory state 0 is initial.
struct FscStructure {
  int k = 1;
  std::vector<int> successor;  // [q] -> next memory state

  bool operator==(const FscStructure&) const = default;
};

/// successor(q) = q+1 for q < k-1; the last memory state loops on itself.
/// Rejects k < 1.
FscStructure chain_memory_structure(int k);

/// Observation-based action-selection parameters gamma[q][z][a]: one
/// probability row over actions per memory state and observation.
struct Instantiation {
  std::vector<std::vector<std::vector<double>>> gamma;

  int memory_size() const { return static_cast<int>(gamma.size()); }

  bool operator==(const Instantiation&) const = default;
};

/// Simplex deviation of one gamma row.
struct GammaRowResidual {
  int q = 0;
  int z = 0;
  double residual = 0.0;
};

struct WellDefinedReport {
  bool ok = false;
  double max_residual = 0.0;
  std::vector<GammaRowResidual> rows;  // one entry per (q, z)
};

/// Checks that u has shape k x num_observations x num_actions and that every
/// gamma row lies on the action simplex within kSimplexTol. Shape mismatches
/// throw ValidationError; simplex violations are reported, not thrown.
WellDefinedReport check_well_defined(const Instantiation& u,
                                     const FscStructure& structure,
                                     int num_observations, int num_actions);

/// Every row uniform over the actions.
Instantiation uniform_instantiation(int k, int num_observations,
                                    int num_actions);

/// Every row drawn uniformly from the action simplex.
Instantiation random_instantiation(int k, int num_observations,
                                   int num_actions, std::mt19937_64& rng);

/// Extends a controller by one memory state, duplicating the last row block.
/// Under chain memory the extended controller induces the same action process
/// as the original, so objective values can only improve when re-optimized.
Instantiation extend_memory(const Instantiation& u);

/// Text form, one line per (q, z):   GAMMA: <q> : <z> <p_a1> <p_a2> ...
/// Indices are 1-based in the text to match state numbering in diagnostics.
std::string serialize_gamma(const Instantiation& u);

/// Parses the GAMMA line format, inferring (k, Z, A) from the content.
/// Requires a full rectangular table; positioned errors via ParseError.
Instantiation parse_gamma(std::istream& in);
Instantiation parse_gamma(const std::string& text);

}  // namespace entromax
