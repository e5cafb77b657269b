#include "entromax/format.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "entromax/common.hpp"

namespace entromax {

ParseError::ParseError(int line, int column, std::string message,
                       std::vector<std::string> expected)
    : std::runtime_error("parse error at line " + std::to_string(line) +
                         ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != '#')
      ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i + 1)});
    i = j;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::istream& in) : in_(in) {}

  Pomdp run() {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      tokens_ = tokenize(line);
      pos_ = 0;
      if (tokens_.empty()) continue;
      dispatch();
    }
    finish();
    return std::move(model_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg,
                         std::vector<std::string> expected = {}) {
    const int col = pos_ < tokens_.size() ? tokens_[pos_].column
                    : tokens_.empty()     ? 1
                                          : tokens_.back().column +
                                              static_cast<int>(tokens_.back().text.size());
    throw ParseError(lineno_, col, msg, std::move(expected));
  }

  bool done() const { return pos_ >= tokens_.size(); }

  const Token& take(const std::string& what) {
    if (done()) fail("missing " + what, {what});
    return tokens_[pos_++];
  }

  void expect_colon() {
    const Token& t = take("':'");
    if (t.text != ":") fail("expected ':', got '" + t.text + "'", {":"});
  }

  int lookup(const std::map<std::string, int>& table, const std::string& kind) {
    const Token& t = take(kind + " id");
    auto it = table.find(t.text);
    if (it == table.end()) {
      --pos_;
      fail("unknown " + kind + " '" + t.text + "'", {kind + " id"});
    }
    return it->second;
  }

  double number(const std::string& what) {
    const Token& t = take(what);
    double v = 0.0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
      --pos_;
      fail("expected " + what + ", got '" + t.text + "'", {what});
    }
    return v;
  }

  void end_of_line() {
    if (!done()) fail("unexpected trailing token '" + tokens_[pos_].text + "'");
  }

  void declare(std::vector<std::string>& ids, std::map<std::string, int>& table,
               const std::string& kind) {
    if (!table.empty()) fail("duplicate '" + kind + ":' section");
    if (done()) fail("empty '" + kind + ":' section", {kind + " id"});
    while (!done()) {
      const Token& t = tokens_[pos_++];
      if (!table.emplace(t.text, static_cast<int>(ids.size())).second) {
        --pos_;
        fail("duplicate " + kind + " id '" + t.text + "'");
      }
      ids.push_back(t.text);
    }
  }

  void require_tables(const std::string& need) {
    if (states_.empty() || actions_.empty() || observations_.empty())
      fail("'" + need +
           "' row before states/actions/observations were declared");
    if (model_.transition.empty()) {
      const std::size_t S = model_.states.size();
      model_.transition.assign(
          S, std::vector<std::vector<double>>(
                 model_.actions.size(), std::vector<double>(S, 0.0)));
      model_.observe.assign(
          S, std::vector<double>(model_.observations.size(), 0.0));
      model_.reward.assign(S, std::vector<double>(model_.actions.size(), 0.0));
    }
  }

  void dispatch() {
    const Token& head = tokens_[pos_];
    const std::string& kw = head.text;
    ++pos_;
    if (kw == "states:") {
      declare(model_.states, states_, "state");
    } else if (kw == "actions:") {
      declare(model_.actions, actions_, "action");
    } else if (kw == "observations:") {
      declare(model_.observations, observations_, "observation");
    } else if (kw == "start:") {
      if (have_start_) fail("duplicate 'start:' line");
      model_.initial = lookup(states_, "state");
      have_start_ = true;
      end_of_line();
    } else if (kw == "T:") {
      require_tables("T:");
      const int a = lookup(actions_, "action");
      expect_colon();
      const int s = lookup(states_, "state");
      expect_colon();
      const int col = tokens_[pos_].column;
      const int s2 = lookup(states_, "state");
      const double p = number("probability");
      end_of_line();
      if (!seen_t_.insert((static_cast<long long>(a) * model_.states.size() + s) *
                              model_.states.size() +
                          s2)
               .second)
        throw ParseError(lineno_, col, "duplicate transition entry");
      model_.transition[s][a][s2] = p;
    } else if (kw == "O:") {
      require_tables("O:");
      const int s = lookup(states_, "state");
      expect_colon();
      const int col = tokens_[pos_].column;
      const int z = lookup(observations_, "observation");
      const double p = number("probability");
      end_of_line();
      if (!seen_o_.insert(static_cast<long long>(s) * model_.observations.size() +
                          z)
               .second)
        throw ParseError(lineno_, col, "duplicate observation entry");
      model_.observe[s][z] = p;
    } else if (kw == "R:") {
      require_tables("R:");
      const int a = lookup(actions_, "action");
      expect_colon();
      const int col = tokens_[pos_].column;
      const int s = lookup(states_, "state");
      const double r = number("reward");
      end_of_line();
      if (!seen_r_.insert(static_cast<long long>(a) * model_.states.size() + s)
               .second)
        throw ParseError(lineno_, col, "duplicate reward entry");
      model_.reward[s][a] = r;
    } else {
      --pos_;
      fail("unknown directive '" + kw + "'",
           {"states:", "actions:", "observations:", "start:", "T:", "O:", "R:"});
    }
  }

  void finish() {
    ++lineno_;
    tokens_.clear();
    pos_ = 0;
    if (states_.empty()) fail("missing 'states:' section", {"states:"});
    if (actions_.empty()) fail("missing 'actions:' section", {"actions:"});
    if (observations_.empty())
      fail("missing 'observations:' section", {"observations:"});
    if (!have_start_) fail("missing 'start:' line", {"start:"});
    if (model_.transition.empty()) {
      const std::size_t S = model_.states.size();
      model_.transition.assign(
          S, std::vector<std::vector<double>>(
                 model_.actions.size(), std::vector<double>(S, 0.0)));
      model_.observe.assign(
          S, std::vector<double>(model_.observations.size(), 0.0));
      model_.reward.assign(S, std::vector<double>(model_.actions.size(), 0.0));
    }
  }

  std::istream& in_;
  Pomdp model_;
  std::map<std::string, int> states_, actions_, observations_;
  std::set<long long> seen_t_, seen_o_, seen_r_;
  bool have_start_ = false;
  int lineno_ = 0;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Pomdp parse_pomdp(std::istream& in) {
  Parser p(in);
  return normalized(p.run());
}

Pomdp parse_pomdp(const std::string& text) {
  std::istringstream in(text);
  return parse_pomdp(in);
}

Pomdp parse_pomdp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  return parse_pomdp(in);
}

std::string serialize_pomdp(const Pomdp& m) {
  std::ostringstream out;
  auto join = [&](const char* head, const std::vector<std::string>& ids) {
    out << head;
    for (const auto& id : ids) out << " " << id;
    out << "\n";
  };
  join("states:", m.states);
  join("actions:", m.actions);
  join("observations:", m.observations);
  out << "start: " << m.states[m.initial] << "\n\n";
  for (int a = 0; a < m.num_actions(); ++a)
    for (int s = 0; s < m.num_states(); ++s)
      for (int s2 = 0; s2 < m.num_states(); ++s2)
        if (m.transition[s][a][s2] != 0.0)
          out << "T: " << m.actions[a] << " : " << m.states[s] << " : "
              << m.states[s2] << " " << format_double(m.transition[s][a][s2])
              << "\n";
  for (int s = 0; s < m.num_states(); ++s)
    for (int z = 0; z < m.num_observations(); ++z)
      if (m.observe[s][z] != 0.0)
        out << "O: " << m.states[s] << " : " << m.observations[z] << " "
            << format_double(m.observe[s][z]) << "\n";
  for (int a = 0; a < m.num_actions(); ++a)
    for (int s = 0; s < m.num_states(); ++s)
      if (m.reward[s][a] != 0.0)
        out << "R: " << m.actions[a] << " : " << m.states[s] << " "
            << format_double(m.reward[s][a]) << "\n";
  return out.str();
}

}  // namespace entromax
