#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "entromax/model.hpp"

namespace entromax {

/// Syntax/reference error in the model text format. Carries the 1-based
/// line/column of the offending token and the token kinds that were expected
/// there.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, std::string message,
             std::vector<std::string> expected = {});
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_ = 0;
  int column_ = 0;
  std::vector<std::string> expected_;
};

/// Parses the line-oriented model format:
///
///   states: <id>...            actions: <id>...
///   observations: <id>...      start: <id>
///   T: <action> : <state> : <state'> <prob>
///   O: <state> : <obs> <prob>
///   R: <action> : <state> <reward>
///
/// '#' starts a comment; omitted entries default to 0. Rows are renormalized
/// exactly once when within 1e-9 of stochastic; anything worse raises
/// ValidationError. Syntax problems, unknown identifiers and duplicate table
/// entries raise ParseError with position information.
Pomdp parse_pomdp(std::istream& in);
Pomdp parse_pomdp(const std::string& text);
Pomdp parse_pomdp_file(const std::string& path);

/// Deterministic serialization: fixed section order, entries in declaration
/// order, zero entries omitted, shortest round-trip decimals.
/// parse_pomdp(serialize_pomdp(m)) == m for any valid model.
std::string serialize_pomdp(const Pomdp& m);

}  // namespace entromax
