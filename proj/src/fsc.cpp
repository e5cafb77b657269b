#include "entromax/fsc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "entromax/common.hpp"
#include "entromax/format.hpp"

namespace entromax {

FscStructure chain_memory_structure(int k) {
  if (k < 1) {
    throw ValidationError("memory size must be at least 1, got " +
                          std::to_string(k));
  }
  FscStructure st;
  st.k = k;
  st.successor.resize(k);
  for (int q = 0; q < k; ++q) st.successor[q] = q + 1 < k ? q + 1 : q;
  return st;
}

WellDefinedReport check_well_defined(const Instantiation& u,
                                     const FscStructure& structure,
                                     int num_observations, int num_actions) {
  if (u.memory_size() != structure.k) {
    throw ValidationError("instantiation has " +
                          std::to_string(u.memory_size()) +
                          " memory states, structure expects " +
                          std::to_string(structure.k));
  }
  WellDefinedReport report;
  report.ok = true;
  for (int q = 0; q < structure.k; ++q) {
    if (static_cast<int>(u.gamma[q].size()) != num_observations) {
      throw ValidationError("gamma[" + std::to_string(q + 1) + "] has " +
                            std::to_string(u.gamma[q].size()) +
                            " observation rows, expected " +
                            std::to_string(num_observations));
    }
    for (int z = 0; z < num_observations; ++z) {
      const auto& row = u.gamma[q][z];
      if (static_cast<int>(row.size()) != num_actions) {
        throw ValidationError("gamma[" + std::to_string(q + 1) + "][" +
                              std::to_string(z + 1) + "] has " +
                              std::to_string(row.size()) +
                              " action entries, expected " +
                              std::to_string(num_actions));
      }
      const double residual = simplex_residual(row);
      report.rows.push_back({q, z, residual});
      report.max_residual = std::max(report.max_residual, residual);
      if (residual > kSimplexTol) report.ok = false;
    }
  }
  return report;
}

Instantiation uniform_instantiation(int k, int num_observations,
                                    int num_actions) {
  if (k < 1 || num_observations < 1 || num_actions < 1) {
    throw ValidationError("instantiation dimensions must be positive");
  }
  Instantiation u;
  u.gamma.assign(
      k, std::vector<std::vector<double>>(
             num_observations,
             std::vector<double>(num_actions, 1.0 / num_actions)));
  return u;
}

Instantiation random_instantiation(int k, int num_observations,
                                   int num_actions, std::mt19937_64& rng) {
  if (k < 1 || num_observations < 1 || num_actions < 1) {
    throw ValidationError("instantiation dimensions must be positive");
  }
  Instantiation u;
  u.gamma.resize(k);
  for (auto& per_obs : u.gamma) {
    per_obs.resize(num_observations);
    for (auto& row : per_obs) row = random_simplex(rng, num_actions);
  }
  return u;
}

Instantiation extend_memory(const Instantiation& u) {
  if (u.gamma.empty()) {
    throw ValidationError("cannot extend an empty instantiation");
  }
  Instantiation out = u;
  out.gamma.push_back(out.gamma.back());
  return out;
}

std::string serialize_gamma(const Instantiation& u) {
  std::ostringstream out;
  for (int q = 0; q < u.memory_size(); ++q) {
    for (std::size_t z = 0; z < u.gamma[q].size(); ++z) {
      out << "GAMMA: " << (q + 1) << " : " << (z + 1);
      for (double p : u.gamma[q][z]) out << ' ' << format_double(p);
      out << '\n';
    }
  }
  return out.str();
}

namespace {

struct GammaToken {
  std::string text;
  int column = 0;
};

std::vector<GammaToken> gamma_tokens(const std::string& line) {
  std::vector<GammaToken> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && line[i] != '#' &&
           !std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    tokens.push_back(
        {line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return tokens;
}

int gamma_index(const GammaToken& token, int line_no, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(
      token.text.data(), token.text.data() + token.text.size(), value);
  if (ec != std::errc() || ptr != token.text.data() + token.text.size() ||
      value < 1) {
    throw ParseError(line_no, token.column,
                     std::string("expected positive ") + what + ", got '" +
                         token.text + "'");
  }
  return value;
}

double gamma_number(const GammaToken& token, int line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(
      token.text.data(), token.text.data() + token.text.size(), value);
  if (ec != std::errc() || ptr != token.text.data() + token.text.size()) {
    throw ParseError(line_no, token.column,
                     "expected probability, got '" + token.text + "'");
  }
  return value;
}

}  // namespace

Instantiation parse_gamma(std::istream& in) {
  // (q, z) -> action row, collected before shape inference.
  std::vector<std::pair<std::pair<int, int>, std::vector<double>>> rows;
  int max_q = 0;
  int max_z = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = gamma_tokens(line);
    if (tokens.empty()) continue;
    if (tokens[0].text != "GAMMA:") {
      throw ParseError(line_no, tokens[0].column,
                       "unknown directive '" + tokens[0].text + "'",
                       {"GAMMA:"});
    }
    if (tokens.size() < 5 || tokens[2].text != ":") {
      throw ParseError(line_no, tokens[0].column,
                       "expected 'GAMMA: <q> : <z> <p>...'");
    }
    const int q = gamma_index(tokens[1], line_no, "memory index");
    const int z = gamma_index(tokens[3], line_no, "observation index");
    std::vector<double> row;
    for (std::size_t i = 4; i < tokens.size(); ++i) {
      row.push_back(gamma_number(tokens[i], line_no));
    }
    for (const auto& existing : rows) {
      if (existing.first == std::make_pair(q, z)) {
        throw ParseError(line_no, tokens[1].column,
                         "duplicate row for memory " + std::to_string(q) +
                             ", observation " + std::to_string(z));
      }
    }
    if (!rows.empty() && rows.front().second.size() != row.size()) {
      throw ParseError(line_no, tokens[4].column,
                       "row has " + std::to_string(row.size()) +
                           " entries, earlier rows have " +
                           std::to_string(rows.front().second.size()));
    }
    max_q = std::max(max_q, q);
    max_z = std::max(max_z, z);
    rows.emplace_back(std::make_pair(q, z), std::move(row));
  }
  if (rows.empty()) {
    throw ParseError(line_no + 1, 1, "no GAMMA rows found");
  }
  if (static_cast<int>(rows.size()) != max_q * max_z) {
    throw ValidationError("gamma table is not rectangular: saw " +
                          std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(max_q) + " x " +
                          std::to_string(max_z));
  }
  const int num_actions = static_cast<int>(rows.front().second.size());
  Instantiation u;
  u.gamma.assign(max_q, std::vector<std::vector<double>>(max_z));
  for (auto& [key, row] : rows) {
    u.gamma[key.first - 1][key.second - 1] = std::move(row);
  }
  for (int q = 0; q < max_q; ++q) {
    for (int z = 0; z < max_z; ++z) {
      auto& row = u.gamma[q][z];
      if (static_cast<int>(row.size()) != num_actions || row.empty()) {
        throw ValidationError("gamma table is missing the row for memory " +
                              std::to_string(q + 1) + ", observation " +
                              std::to_string(z + 1));
      }
      if (!renormalize_row(row)) {
        throw ValidationError(
            "gamma row for memory " + std::to_string(q + 1) +
            ", observation " + std::to_string(z + 1) +
            " is not a probability distribution");
      }
    }
  }
  return u;
}

Instantiation parse_gamma(const std::string& text) {
  std::istringstream in(text);
  return parse_gamma(in);
}

}  // namespace entromax
