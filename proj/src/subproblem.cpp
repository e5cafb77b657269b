#include "entromax/subproblem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "entromax/common.hpp"

namespace entromax {
namespace {

constexpr double kInitMargin = 1e-3;  // strict-feasibility margin at start
constexpr double kGammaFloor = 1e-9;  // interior lift of starting parameters
constexpr double kFtb = 0.99;         // fraction-to-boundary factor
constexpr double kArmijo = 1e-4;
constexpr double kSigma = 0.2;      // barrier reduction per stage
constexpr double kDelta0 = 1e-8;    // primal regularization
constexpr double kDeltaEq = 1e-10;  // dual (equality) regularization
constexpr int kStageCap = 80;
constexpr int kTotalCap = 2000;
constexpr int kLineSearchCap = 60;

struct DcLink {
  int lx = 0;  // row-local index of the successor value variable
  int ly = 0;  // row-local index of the parameter variable
  int target = 0;
  int g = 0;
  double c = 0.0;
};

struct LocalTerm {
  int lg = 0;
  double c = 0.0;
};

/// One value row in row-local variable numbering. `vars` maps local indices
/// to global variable ids; everything else references local slots so the
/// gradient scratch and the Hessian emission stay cache-friendly.
struct Row {
  int self = 0;
  std::vector<int> vars;
  std::vector<int> target_begin;        // groups local_terms by successor
  std::vector<LocalTerm> local_terms;   // entropy rows: transition masses
  std::vector<DcLink> dc;               // bilinear occurrences
  std::vector<int> classes;             // slack variables of the row
  std::vector<std::pair<int, double>> lin;  // reward rows: direct weights
};

}  // namespace

struct SubproblemSolver::Impl {
  const NlpProblem* p = nullptr;
  bool has_entropy = false;
  bool has_reward = false;
  double beta = 1.0;

  int nf = 0;
  std::vector<int> fvar;  // product state -> free index, -1 when pinned
  int ofs_nu = 0, ofs_eta = 0, ofs_gamma = 0, ofs_phi_nu = 0, ofs_phi_eta = 0;
  int num_vars = 0, num_eq = 0;
  int m_ineq = 0;
  int vth = -1;  // threshold variable (eta at the initial state)

  std::vector<Row> erows, rrows;  // indexed by free state

  Eigen::SparseMatrix<double> kkt;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  std::vector<int> slot_seq;  // emission order -> compressed value slot
  int nnz = 0;

  Eigen::VectorXd obj;  // maximized linear objective, rebuilt per solve
  std::vector<double> sg;  // gradient scratch, row-local
  std::vector<double> tm;  // per-target mass scratch (entropy rows)

  explicit Impl(const NlpProblem& problem);
  Row build_row(bool entropy_row, int s) const;

  template <bool kLive, class Emit>
  void walk(const Eigen::VectorXd* x, const DcExpansion* hat, double mu,
            double delta, double delta_eq, Eigen::VectorXd* grad, Emit&& emit);
  template <bool kLive, bool kEntropy, class Emit>
  void walk_row(const Row& row, const Eigen::VectorXd* x,
                const DcExpansion* hat, double mu, Eigen::VectorXd* grad,
                Emit&& emit);

  template <bool kEntropy>
  double row_g(const Row& row, const Eigen::VectorXd& x,
               const DcExpansion& hat) const;
  /// Barrier objective at x, or infeasibility (any g <= 0).
  bool eval_point(const Eigen::VectorXd& x, const DcExpansion& hat, double mu,
                  double* value) const;

  void assemble(const Eigen::VectorXd& x, const DcExpansion& hat, double mu,
                double delta, double delta_eq, Eigen::VectorXd& grad);
  Eigen::VectorXd initial_point(const DcExpansion& hat,
                                const SubproblemResult* warm) const;
  void renormalize_gamma(Eigen::VectorXd& x) const;

  SubproblemResult solve(const DcExpansion& hat, double tau, double tolerance,
                         const SubproblemResult* warm);
  SubproblemResult package(const Eigen::VectorXd& x, double kkt_residual,
                           int steps, bool converged) const;
};

SubproblemSolver::Impl::Impl(const NlpProblem& problem) : p(&problem) {
  has_entropy = p->include_entropy;
  has_reward = std::isfinite(p->gamma_threshold);
  if (!has_entropy && !has_reward) {
    throw ValidationError(
        "the feasibility program needs a finite reward threshold");
  }
  beta = p->beta;

  fvar.assign(p->num_states, -1);
  for (int s = 0; s < p->num_states; ++s) {
    if (!p->pinned[s]) fvar[s] = nf++;
  }
  if (has_entropy && fvar[p->initial] < 0) {
    throw ValidationError(
        "the initial state can generate neither entropy nor reward");
  }

  const int c = p->num_slack_classes;
  ofs_nu = 0;
  ofs_eta = ofs_nu + (has_entropy ? nf : 0);
  ofs_gamma = ofs_eta + (has_reward ? nf : 0);
  ofs_phi_nu = ofs_gamma + p->num_params;
  ofs_phi_eta = ofs_phi_nu + (has_entropy ? c : 0);
  num_vars = ofs_phi_eta + (has_reward ? c : 0);
  num_eq = p->num_simplex_rows;
  if (has_reward) vth = ofs_eta + fvar[p->initial];

  m_ineq = p->num_params;
  if (has_entropy) m_ineq += nf + 2 * nf + c;
  if (has_reward) m_ineq += nf + 2 * nf + c + 1;

  for (int s = 0; s < p->num_states; ++s) {
    if (fvar[s] < 0) continue;
    if (has_entropy) erows.push_back(build_row(true, s));
    if (has_reward) rrows.push_back(build_row(false, s));
  }

  std::size_t max_support = 1, max_targets = 1;
  for (const auto* rows : {&erows, &rrows}) {
    for (const auto& row : *rows) {
      max_support = std::max(max_support, row.vars.size());
      if (!row.target_begin.empty()) {
        max_targets = std::max(max_targets, row.target_begin.size());
      }
    }
  }
  sg.resize(max_support);
  tm.resize(max_targets);

  // Dry pass: record the Hessian fill positions in emission order, then map
  // every emission onto its slot in the compressed matrix so later passes
  // write values without re-sorting triplets.
  std::vector<std::pair<int, int>> pos_seq;
  walk<false>(nullptr, nullptr, 0.0, 0.0, 0.0, nullptr,
              [&](int a, int b, double) {
                pos_seq.emplace_back(std::max(a, b), std::min(a, b));
              });
  std::vector<std::pair<int, int>> uniq = pos_seq;
  std::sort(uniq.begin(), uniq.end(),
            [](const auto& l, const auto& r) {
              return l.second != r.second ? l.second < r.second
                                          : l.first < r.first;
            });
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(uniq.size());
    for (const auto& [i, j] : uniq) trips.emplace_back(i, j, 1.0);
    kkt.resize(num_vars + num_eq, num_vars + num_eq);
    kkt.setFromTriplets(trips.begin(), trips.end());
    kkt.makeCompressed();
  }
  nnz = static_cast<int>(kkt.nonZeros());
  slot_seq.resize(pos_seq.size());
  const int* outer = kkt.outerIndexPtr();
  const int* inner = kkt.innerIndexPtr();
  for (std::size_t k = 0; k < pos_seq.size(); ++k) {
    const auto [i, j] = pos_seq[k];
    const int* begin = inner + outer[j];
    const int* end = inner + outer[j + 1];
    const int* it = std::lower_bound(begin, end, i);
    slot_seq[k] = static_cast<int>(it - inner);
  }
  ldlt.analyzePattern(kkt);
}

Row SubproblemSolver::Impl::build_row(bool entropy_row, int s) const {
  Row row;
  std::map<int, int> loc;
  auto local = [&](int v) {
    auto [it, inserted] = loc.insert({v, static_cast<int>(row.vars.size())});
    if (inserted) row.vars.push_back(v);
    return it->second;
  };
  if (entropy_row) {
    std::map<int, std::vector<std::pair<int, double>>> by_target;
    for (const auto& term : p->row_terms[s]) {
      by_target[term.target].push_back({term.g, term.c});
    }
    for (const auto& [target, terms] : by_target) {
      row.target_begin.push_back(static_cast<int>(row.local_terms.size()));
      for (const auto& [g, c] : terms) {
        row.local_terms.push_back({local(ofs_gamma + g), c});
      }
    }
    row.target_begin.push_back(static_cast<int>(row.local_terms.size()));
  } else {
    for (const auto& [g, w] : p->reward_weights[s]) {
      row.lin.push_back({local(ofs_gamma + g), w});
    }
  }
  const int value_base = entropy_row ? ofs_nu : ofs_eta;
  for (const auto& term : p->row_terms[s]) {
    if (!term.value_flows) continue;
    DcLink link;
    link.lx = local(value_base + fvar[term.target]);
    link.ly = local(ofs_gamma + term.g);
    link.target = term.target;
    link.g = term.g;
    link.c = term.c;
    row.dc.push_back(link);
  }
  const int phi_base = entropy_row ? ofs_phi_nu : ofs_phi_eta;
  for (int cls : p->row_slacks[s]) row.classes.push_back(local(phi_base + cls));
  row.self = local(value_base + fvar[s]);
  return row;
}

template <bool kLive, bool kEntropy, class Emit>
void SubproblemSolver::Impl::walk_row(const Row& row, const Eigen::VectorXd* x,
                                      const DcExpansion* hat, double mu,
                                      Eigen::VectorXd* grad, Emit&& emit) {
  const std::size_t m = row.vars.size();
  double coef1 = 0.0, coef2 = 0.0;
  if constexpr (kLive) {
    std::fill(sg.begin(), sg.begin() + m, 0.0);
    double g = 0.0;
    if constexpr (kEntropy) {
      const int nt = static_cast<int>(row.target_begin.size()) - 1;
      for (int t = 0; t < nt; ++t) {
        double mass = 0.0;
        for (int i = row.target_begin[t]; i < row.target_begin[t + 1]; ++i) {
          mass += row.local_terms[i].c * (*x)[row.vars[row.local_terms[i].lg]];
        }
        tm[t] = mass;
        const double lm = std::log(mass);
        g -= mass * lm;
        for (int i = row.target_begin[t]; i < row.target_begin[t + 1]; ++i) {
          sg[row.local_terms[i].lg] -= row.local_terms[i].c * (1.0 + lm);
        }
      }
    } else {
      for (const auto& [lg, w] : row.lin) {
        g += w * (*x)[row.vars[lg]];
        sg[lg] += w;
      }
    }
    const std::vector<double>& hv = kEntropy ? hat->nu : hat->eta;
    for (const auto& link : row.dc) {
      const double s = hv[link.target] + hat->gamma[link.g];
      const double xx = (*x)[row.vars[link.lx]];
      const double yy = (*x)[row.vars[link.ly]];
      const double d = xx + yy - s;
      g += beta * link.c * (xx * yy - 0.5 * d * d);
      sg[link.lx] += beta * link.c * (s - xx);
      sg[link.ly] += beta * link.c * (s - yy);
    }
    for (int lc : row.classes) {
      g += beta * (*x)[row.vars[lc]];
      sg[lc] += beta;
    }
    g -= (*x)[row.vars[row.self]];
    sg[row.self] -= 1.0;

    coef2 = mu / g;
    coef1 = coef2 / g;
    for (std::size_t a = 0; a < m; ++a) {
      (*grad)[row.vars[a]] -= coef2 * sg[a];
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      emit(row.vars[a], row.vars[b], kLive ? coef1 * sg[a] * sg[b] : 0.0);
    }
  }
  for (const auto& link : row.dc) {
    const double v = kLive ? coef2 * beta * link.c : 0.0;
    emit(row.vars[link.lx], row.vars[link.lx], v);
    emit(row.vars[link.ly], row.vars[link.ly], v);
  }
  if constexpr (kEntropy) {
    const int nt = static_cast<int>(row.target_begin.size()) - 1;
    for (int t = 0; t < nt; ++t) {
      const double inv = kLive ? coef2 / tm[t] : 0.0;
      for (int i = row.target_begin[t]; i < row.target_begin[t + 1]; ++i) {
        for (int j = row.target_begin[t]; j <= i; ++j) {
          emit(row.vars[row.local_terms[i].lg], row.vars[row.local_terms[j].lg],
               kLive ? inv * row.local_terms[i].c * row.local_terms[j].c : 0.0);
        }
      }
    }
  }
}

template <bool kLive, class Emit>
void SubproblemSolver::Impl::walk(const Eigen::VectorXd* x,
                                  const DcExpansion* hat, double mu,
                                  double delta, double delta_eq,
                                  Eigen::VectorXd* grad, Emit&& emit) {
  for (int v = 0; v < num_vars; ++v) emit(v, v, delta);
  for (int e = 0; e < num_eq; ++e) emit(num_vars + e, num_vars + e, -delta_eq);
  for (int r = 0; r < num_eq; ++r) {
    for (int a = 0; a < p->num_actions; ++a) {
      emit(num_vars + r, ofs_gamma + r * p->num_actions + a, 1.0);
    }
  }
  if (has_entropy) {
    for (const auto& row : erows) {
      walk_row<kLive, true>(row, x, hat, mu, grad, emit);
    }
  }
  if (has_reward) {
    for (const auto& row : rrows) {
      walk_row<kLive, false>(row, x, hat, mu, grad, emit);
    }
    double v = 0.0;
    if constexpr (kLive) {
      const double g = (*x)[vth] - p->gamma_threshold;
      (*grad)[vth] -= mu / g;
      v = mu / (g * g);
    }
    emit(vth, vth, v);
  }
  auto boxed = [&](int v, double lo, double hi) {
    double h = 0.0;
    if constexpr (kLive) {
      const double gl = (*x)[v] - lo;
      const double gh = hi - (*x)[v];
      (*grad)[v] += -mu / gl + mu / gh;
      h = mu / (gl * gl) + mu / (gh * gh);
    } else {
      (void)lo;
      (void)hi;
    }
    emit(v, v, h);
  };
  auto lower = [&](int v) {
    double h = 0.0;
    if constexpr (kLive) {
      const double gl = (*x)[v];
      (*grad)[v] -= mu / gl;
      h = mu / (gl * gl);
    }
    emit(v, v, h);
  };
  if (has_entropy) {
    for (int f = 0; f < nf; ++f) boxed(ofs_nu + f, p->nu_lo, p->nu_hi);
  }
  if (has_reward) {
    for (int f = 0; f < nf; ++f) boxed(ofs_eta + f, p->eta_lo, p->eta_hi);
  }
  for (int g = 0; g < p->num_params; ++g) lower(ofs_gamma + g);
  if (has_entropy) {
    for (int c = 0; c < p->num_slack_classes; ++c) lower(ofs_phi_nu + c);
  }
  if (has_reward) {
    for (int c = 0; c < p->num_slack_classes; ++c) lower(ofs_phi_eta + c);
  }
}

template <bool kEntropy>
double SubproblemSolver::Impl::row_g(const Row& row, const Eigen::VectorXd& x,
                                     const DcExpansion& hat) const {
  double g = 0.0;
  if constexpr (kEntropy) {
    const int nt = static_cast<int>(row.target_begin.size()) - 1;
    for (int t = 0; t < nt; ++t) {
      double mass = 0.0;
      for (int i = row.target_begin[t]; i < row.target_begin[t + 1]; ++i) {
        mass += row.local_terms[i].c * x[row.vars[row.local_terms[i].lg]];
      }
      if (mass <= 0.0) return -1.0;
      g -= mass * std::log(mass);
    }
  } else {
    for (const auto& [lg, w] : row.lin) g += w * x[row.vars[lg]];
  }
  const std::vector<double>& hv = kEntropy ? hat.nu : hat.eta;
  for (const auto& link : row.dc) {
    const double s = hv[link.target] + hat.gamma[link.g];
    const double xx = x[row.vars[link.lx]];
    const double yy = x[row.vars[link.ly]];
    const double d = xx + yy - s;
    g += beta * link.c * (xx * yy - 0.5 * d * d);
  }
  for (int lc : row.classes) g += beta * x[row.vars[lc]];
  g -= x[row.vars[row.self]];
  return g;
}

bool SubproblemSolver::Impl::eval_point(const Eigen::VectorXd& x,
                                        const DcExpansion& hat, double mu,
                                        double* value) const {
  double f = -obj.dot(x);
  auto take = [&](double g) {
    if (g <= 0.0) return false;
    f -= mu * std::log(g);
    return true;
  };
  if (has_entropy) {
    for (const auto& row : erows) {
      if (!take(row_g<true>(row, x, hat))) return false;
    }
    for (int v = ofs_nu; v < ofs_nu + nf; ++v) {
      if (!take(x[v] - p->nu_lo) || !take(p->nu_hi - x[v])) return false;
    }
    for (int v = ofs_phi_nu; v < ofs_phi_nu + p->num_slack_classes; ++v) {
      if (!take(x[v])) return false;
    }
  }
  if (has_reward) {
    for (const auto& row : rrows) {
      if (!take(row_g<false>(row, x, hat))) return false;
    }
    if (!take(x[vth] - p->gamma_threshold)) return false;
    for (int v = ofs_eta; v < ofs_eta + nf; ++v) {
      if (!take(x[v] - p->eta_lo) || !take(p->eta_hi - x[v])) return false;
    }
    for (int v = ofs_phi_eta; v < ofs_phi_eta + p->num_slack_classes; ++v) {
      if (!take(x[v])) return false;
    }
  }
  for (int v = ofs_gamma; v < ofs_gamma + p->num_params; ++v) {
    if (!take(x[v])) return false;
  }
  *value = f;
  return true;
}

void SubproblemSolver::Impl::assemble(const Eigen::VectorXd& x,
                                      const DcExpansion& hat, double mu,
                                      double delta, double delta_eq,
                                      Eigen::VectorXd& grad) {
  std::fill_n(kkt.valuePtr(), nnz, 0.0);
  grad = -obj;
  std::size_t cursor = 0;
  double* values = kkt.valuePtr();
  walk<true>(&x, &hat, mu, delta, delta_eq, &grad,
             [&](int, int, double v) { values[slot_seq[cursor++]] += v; });
  if (cursor != slot_seq.size()) {
    throw std::logic_error("subproblem assembly drifted from its pattern");
  }
}

void SubproblemSolver::Impl::renormalize_gamma(Eigen::VectorXd& x) const {
  for (int r = 0; r < num_eq; ++r) {
    double sum = 0.0;
    const int base = ofs_gamma + r * p->num_actions;
    for (int a = 0; a < p->num_actions; ++a) sum += x[base + a];
    if (sum > 0.0 && sum != 1.0) {
      for (int a = 0; a < p->num_actions; ++a) x[base + a] /= sum;
    }
  }
}

Eigen::VectorXd SubproblemSolver::Impl::initial_point(
    const DcExpansion& hat, const SubproblemResult* warm) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_vars);
  const std::vector<double>& g0 = warm ? warm->gamma : hat.gamma;
  for (int g = 0; g < p->num_params; ++g) {
    x[ofs_gamma + g] = std::max(g0[g], kGammaFloor);
  }
  renormalize_gamma(x);

  for (int s = 0; s < p->num_states; ++s) {
    const int f = fvar[s];
    if (f < 0) continue;
    if (has_entropy) {
      x[ofs_nu + f] = std::clamp(hat.nu[s], p->nu_lo + kInitMargin,
                                 p->nu_hi - kInitMargin);
    }
    if (has_reward) {
      x[ofs_eta + f] = std::clamp(hat.eta[s], p->eta_lo + kInitMargin,
                                  p->eta_hi - kInitMargin);
    }
  }
  if (has_reward) {
    x[vth] = std::clamp(std::max(x[vth], p->gamma_threshold + kInitMargin),
                        p->eta_lo + kInitMargin, p->eta_hi - kInitMargin);
  }

  // Rows without slack classes have no bilinear part, so their right-hand
  // side is a function of gamma alone; place the value just below it.
  auto settle = [&](const Row& row, bool entropy_row, double lo) {
    if (!row.classes.empty()) return;
    Eigen::VectorXd probe = x;
    probe[row.vars[row.self]] = 0.0;
    const double rhs = entropy_row ? row_g<true>(row, probe, hat)
                                   : row_g<false>(row, probe, hat);
    x[row.vars[row.self]] = std::max(lo + 1e-6, rhs - kInitMargin);
  };
  if (has_entropy) {
    for (const auto& row : erows) settle(row, true, p->nu_lo);
  }
  if (has_reward) {
    for (const auto& row : rrows) settle(row, false, p->eta_lo);
  }

  // Lift the shared slacks until every remaining row clears the margin.
  if (p->num_slack_classes > 0) {
    if (has_entropy) {
      for (int c = 0; c < p->num_slack_classes; ++c) {
        x[ofs_phi_nu + c] = 1e-4;
      }
    }
    if (has_reward) {
      for (int c = 0; c < p->num_slack_classes; ++c) {
        x[ofs_phi_eta + c] = 1e-4;
      }
    }
    for (int round = 0; round < 5; ++round) {
      bool lifted = false;
      auto lift = [&](const Row& row, double g) {
        if (g >= kInitMargin || row.classes.empty()) return;
        const double need = (kInitMargin - g) / beta;
        for (int lc : row.classes) x[row.vars[lc]] += need;
        lifted = true;
      };
      if (has_entropy) {
        for (const auto& row : erows) lift(row, row_g<true>(row, x, hat));
      }
      if (has_reward) {
        for (const auto& row : rrows) lift(row, row_g<false>(row, x, hat));
      }
      if (!lifted) break;
    }
  }
  return x;
}

SubproblemResult SubproblemSolver::Impl::package(const Eigen::VectorXd& x,
                                                 double kkt_residual,
                                                 int steps,
                                                 bool converged) const {
  SubproblemResult r;
  r.gamma.resize(p->num_params);
  for (int g = 0; g < p->num_params; ++g) r.gamma[g] = x[ofs_gamma + g];
  r.nu.assign(p->num_states, 0.0);
  r.eta.assign(p->num_states, 0.0);
  for (int s = 0; s < p->num_states; ++s) {
    const int f = fvar[s];
    if (f < 0) continue;
    if (has_entropy) r.nu[s] = x[ofs_nu + f];
    if (has_reward) r.eta[s] = x[ofs_eta + f];
  }
  r.val = obj.dot(x);
  r.slack_sum = 0.0;
  if (has_entropy) {
    for (int c = 0; c < p->num_slack_classes; ++c) {
      r.slack_sum += x[ofs_phi_nu + c];
    }
  }
  if (has_reward) {
    for (int c = 0; c < p->num_slack_classes; ++c) {
      r.slack_sum += x[ofs_phi_eta + c];
    }
  }
  r.kkt_residual = kkt_residual;
  r.newton_steps = steps;
  r.converged = converged;
  return r;
}

SubproblemResult SubproblemSolver::Impl::solve(const DcExpansion& hat,
                                               double tau, double tolerance,
                                               const SubproblemResult* warm) {
  if (static_cast<int>(hat.gamma.size()) != p->num_params ||
      static_cast<int>(hat.nu.size()) != p->num_states ||
      static_cast<int>(hat.eta.size()) != p->num_states) {
    throw ValidationError("expansion point does not match the program");
  }
  obj = Eigen::VectorXd::Zero(num_vars);
  if (has_entropy) {
    obj[ofs_nu + fvar[p->initial]] = 1.0;
    for (int c = 0; c < p->num_slack_classes; ++c) {
      obj[ofs_phi_nu + c] = -tau;
    }
  }
  if (has_reward) {
    for (int c = 0; c < p->num_slack_classes; ++c) {
      obj[ofs_phi_eta + c] = -tau;
    }
  }

  Eigen::VectorXd x = initial_point(hat, warm);
  // The floor keeps the centering target above the decrement noise injected
  // by the regularized KKT solves (~delta_eq * |w|^2).
  const double mu_f = std::max(1e-9, tolerance / std::max(1, m_ineq));
  double mu = warm ? std::max(1e-4, mu_f) : std::max(1.0, mu_f);
  double f_cur = 0.0;
  if (!eval_point(x, hat, mu, &f_cur)) {
    return package(x, 1.0, 0, false);
  }

  double delta = kDelta0;
  double delta_eq = kDeltaEq;
  Eigen::VectorXd grad(num_vars), rhs(num_vars + num_eq);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(num_eq);
  int steps = 0;
  bool numerical_failure = false;
  bool capped = false;
  double last_dec2 = 0.0;
  double last_noise = 0.0;

  while (true) {
    bool centered = false;
    delta = kDelta0;
    delta_eq = kDeltaEq;
    for (int it = 0; it < kStageCap; ++it) {
      assemble(x, hat, mu, delta, delta_eq, grad);
      while (true) {
        ldlt.factorize(kkt);
        if (ldlt.info() == Eigen::Success) break;
        delta *= 10.0;
        delta_eq = std::min(delta_eq * 10.0, 1e-6);
        if (delta > 1e-1) {
          numerical_failure = true;
          break;
        }
        assemble(x, hat, mu, delta, delta_eq, grad);
      }
      if (numerical_failure) break;

      rhs.head(num_vars) = -grad;
      for (int r = 0; r < num_eq; ++r) {
        double sum = 0.0;
        const int base = ofs_gamma + r * p->num_actions;
        for (int a = 0; a < p->num_actions; ++a) sum += x[base + a];
        rhs[num_vars + r] = 1.0 - sum;
      }
      Eigen::VectorXd sol = ldlt.solve(rhs);
      Eigen::VectorXd dx = sol.head(num_vars);
      w = sol.tail(num_eq);

      const double gdx = grad.dot(dx);
      last_dec2 = -gdx;
      // The regularized KKT solve injects roughly delta*|dx|^2 +
      // delta_eq*|w|^2 into the measured decrement; below that level the
      // decrement is solve noise, not distance from the central path.
      last_noise = delta * dx.squaredNorm() + delta_eq * w.squaredNorm();
      // Scale-free centering test: the squared Newton decrement of the
      // barrier scaled by 1/mu stays below 0.25^2.
      if (last_dec2 <= 0.0625 * mu + 16.0 * last_noise) {
        centered = true;
        break;
      }

      // Exact fraction-to-boundary caps on the linear constraints; the
      // nonlinear rows are enforced by the backtracking below.
      double alpha = 1.0;
      auto cap_lower = [&](int v, double lo) {
        if (dx[v] < 0.0) alpha = std::min(alpha, kFtb * (x[v] - lo) / -dx[v]);
      };
      auto cap_upper = [&](int v, double hi) {
        if (dx[v] > 0.0) alpha = std::min(alpha, kFtb * (hi - x[v]) / dx[v]);
      };
      if (has_entropy) {
        for (int v = ofs_nu; v < ofs_nu + nf; ++v) {
          cap_lower(v, p->nu_lo);
          cap_upper(v, p->nu_hi);
        }
        for (int v = ofs_phi_nu; v < ofs_phi_nu + p->num_slack_classes; ++v) {
          cap_lower(v, 0.0);
        }
      }
      if (has_reward) {
        for (int v = ofs_eta; v < ofs_eta + nf; ++v) {
          cap_lower(v, p->eta_lo);
          cap_upper(v, p->eta_hi);
        }
        for (int v = ofs_phi_eta; v < ofs_phi_eta + p->num_slack_classes;
             ++v) {
          cap_lower(v, 0.0);
        }
        cap_lower(vth, p->gamma_threshold);
      }
      for (int v = ofs_gamma; v < ofs_gamma + p->num_params; ++v) {
        cap_lower(v, 0.0);
      }

      bool accepted = false;
      double f_trial = 0.0;
      for (int ls = 0; ls < kLineSearchCap; ++ls) {
        const Eigen::VectorXd trial = x + alpha * dx;
        if (eval_point(trial, hat, mu, &f_trial) &&
            f_trial <= f_cur + kArmijo * alpha * gdx) {
          x = trial;
          f_cur = f_trial;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // A stall within an order of magnitude of the target is centering
        // noise, not failure.
        if (last_dec2 <= 0.625 * mu + 16.0 * last_noise) centered = true;
        break;
      }
      ++steps;
      if (steps >= kTotalCap) {
        capped = true;
        break;
      }

      // Absorb the tiny simplex drift left by the regularized system when
      // doing so keeps the point strictly feasible.
      double drift = 0.0;
      for (int r = 0; r < num_eq; ++r) {
        double sum = 0.0;
        const int base = ofs_gamma + r * p->num_actions;
        for (int a = 0; a < p->num_actions; ++a) sum += x[base + a];
        drift = std::max(drift, std::abs(sum - 1.0));
      }
      if (drift > 1e-12) {
        Eigen::VectorXd fixed = x;
        renormalize_gamma(fixed);
        double f_fixed = 0.0;
        if (eval_point(fixed, hat, mu, &f_fixed)) {
          x = fixed;
          f_cur = f_fixed;
        }
      }
    }
    if (numerical_failure || capped) break;
    if (mu <= mu_f * (1.0 + 1e-12)) {
      // Same leniency as the in-stage stall test: a decrement within an
      // order of magnitude of the target is regularization noise.
      if (!centered && last_dec2 > 0.625 * mu + 16.0 * last_noise) {
        numerical_failure = true;
      }
      break;
    }
    mu = std::max(mu_f, kSigma * mu);
    if (!eval_point(x, hat, mu, &f_cur)) {
      numerical_failure = true;
      break;
    }
  }

  renormalize_gamma(x);
  double primal = 0.0;
  for (int r = 0; r < num_eq; ++r) {
    double sum = 0.0;
    const int base = ofs_gamma + r * p->num_actions;
    for (int a = 0; a < p->num_actions; ++a) sum += x[base + a];
    primal = std::max(primal, std::abs(sum - 1.0));
  }
  const double kkt_residual = std::max(0.5 * std::max(last_dec2, 0.0), primal);
  const bool converged = !numerical_failure && !capped;
  return package(x, kkt_residual, steps, converged);
}

SubproblemSolver::SubproblemSolver(const NlpProblem& problem)
    : impl_(std::make_unique<Impl>(problem)) {}

SubproblemSolver::~SubproblemSolver() = default;

SubproblemResult SubproblemSolver::solve(const DcExpansion& hat, double tau,
                                         double tolerance,
                                         const SubproblemResult* warm) {
  return impl_->solve(hat, tau, tolerance, warm);
}

const NlpProblem& SubproblemSolver::problem() const { return *impl_->p; }

}  // namespace entromax
