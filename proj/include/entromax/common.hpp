#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace entromax {

/// Raised when an iterative optimization routine exhausts its iteration
/// budget or breaks down numerically before reaching its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Default tolerance for stochasticity checks (row sums, simplex residuals).
inline constexpr double kSimplexTol = 1e-9;

/// Rows whose sum deviates by no more than this are left untouched at load
/// time; deviations in (kRenormSkipTol, kSimplexTol] are renormalized once.
/// Keeps normalization idempotent so serialize/parse round-trips are exact.
inline constexpr double kRenormSkipTol = 1e-12;

inline double bits_from_nats(double nats) { return nats / M_LN2; }
inline double nats_from_bits(double bits) { return bits * M_LN2; }

/// -p*log2(p) with the 0*log(0)=0 convention.
inline double entropy_term_bits(double p) {
  return p > 0.0 ? -p * std::log2(p) : 0.0;
}

/// Shannon entropy (bits) of a probability row.
double entropy_bits(const std::vector<double>& p);

/// True if every entry is >= -1e-12 and the sum is within tol of 1.
bool is_distribution(const std::vector<double>& p, double tol = kSimplexTol);

/// Largest absolute deviation from the simplex: max(negative part, |sum-1|).
double simplex_residual(const std::vector<double>& p);

/// Clips tiny negatives and divides by the row sum when the deviation lies in
/// (kRenormSkipTol, tol]. Returns false when the row is too far from
/// stochastic to repair.
bool renormalize_row(std::vector<double>& p, double tol = kSimplexTol);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v);

/// Uniform sample from the probability simplex (exponential spacings).
std::vector<double> random_simplex(std::mt19937_64& rng, int dim);

/// SplitMix64 step; used to derive independent per-restart seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic seed for substream `index` of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// FNV-1a 64-bit hash (manifest input hashes).
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace entromax
