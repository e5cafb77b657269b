#include "entromax/common.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace entromax {

double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) h += entropy_term_bits(v);
  return h;
}

bool is_distribution(const std::vector<double>& p, double tol) {
  return simplex_residual(p) <= tol;
}

double simplex_residual(const std::vector<double>& p) {
  double sum = 0.0, neg = 0.0;
  for (double v : p) {
    sum += v;
    neg = std::max(neg, -v);
  }
  return std::max(neg, std::abs(sum - 1.0));
}

bool renormalize_row(std::vector<double>& p, double tol) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < 0.0 && v >= -1e-12) v = 0.0;
    sum += v;
  }
  const double dev = std::abs(sum - 1.0);
  if (dev > tol || sum <= 0.0) return false;
  if (dev > kRenormSkipTol) {
    for (double& v : p) v /= sum;
  }
  return true;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  // Euclidean projection (Held et al. sort-based algorithm).
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i + 1);
      theta = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - theta);
  // kill residual rounding so downstream simplex checks see <= 1e-16*n
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum > 0.0)
    for (double& x : v) x /= sum;
  return v;
}

std::vector<double> random_simplex(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(dim);
  double sum = 0.0;
  for (double& x : v) {
    double u;
    do {
      u = unit(rng);
    } while (u <= 0.0);
    x = -std::log(u);
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace entromax
