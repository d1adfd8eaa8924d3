#include "atmplace/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <queue>
#include <sstream>

#include "atmplace/rng.hpp"

namespace atmplace::milp {

std::string status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::FeasibleTimeout: return "FeasibleTimeout";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::Timeout: return "Timeout";
  }
  return "?";
}

int MilpProblem::add_continuous(double lb, double ub, std::string name) {
  vars_.push_back({lb, ub, false, std::move(name)});
  obj_.push_back(0.0);
  return num_vars() - 1;
}

int MilpProblem::add_binary(std::string name) {
  vars_.push_back({0.0, 1.0, true, std::move(name)});
  obj_.push_back(0.0);
  return num_vars() - 1;
}

void MilpProblem::set_bounds(int var, double lb, double ub) {
  vars_.at(var).lb = lb;
  vars_.at(var).ub = ub;
}

int MilpProblem::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                        [](const Variable& v) { return v.binary; }));
}

void MilpProblem::add_constraint(const LinearExpr& lhs, Sense sense, double rhs, std::string name) {
  std::map<int, double> merged;
  for (const auto& t : lhs.terms) merged[t.var] += t.coef;
  Constraint c;
  for (const auto& [v, a] : merged)
    if (a != 0.0) c.terms.push_back({v, a});
  c.sense = sense;
  c.rhs = rhs - lhs.constant;
  c.name = std::move(name);
  cons_.push_back(std::move(c));
}

void MilpProblem::set_objective(const LinearExpr& obj) {
  std::fill(obj_.begin(), obj_.end(), 0.0);
  obj_const_ = 0.0;
  add_objective(obj);
}

void MilpProblem::add_objective(int var, double coef) { obj_.at(var) += coef; }

void MilpProblem::add_objective(const LinearExpr& expr, double scale) {
  for (const auto& t : expr.terms) obj_.at(t.var) += scale * t.coef;
  obj_const_ += scale * expr.constant;
}

void MilpProblem::validate() const {
  for (int j = 0; j < num_vars(); ++j) {
    const auto& v = vars_[j];
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
      throw ValidationError("variable " + std::to_string(j) + ": invalid bounds");
    if (v.binary && (v.lb < 0 || v.ub > 1))
      throw ValidationError("variable " + std::to_string(j) + ": binary bounds outside [0,1]");
    if (!std::isfinite(obj_[j])) throw ValidationError("objective coefficient not finite");
  }
  for (std::size_t i = 0; i < cons_.size(); ++i) {
    if (!std::isfinite(cons_[i].rhs))
      throw ValidationError("constraint " + std::to_string(i) + ": rhs not finite");
    for (const auto& t : cons_[i].terms) {
      if (t.var < 0 || t.var >= num_vars())
        throw ValidationError("constraint " + std::to_string(i) + ": undeclared variable " +
                              std::to_string(t.var));
      if (!std::isfinite(t.coef))
        throw ValidationError("constraint " + std::to_string(i) + ": coefficient not finite");
    }
  }
}

int add_abs(MilpProblem& p, const LinearExpr& expr, std::string name) {
  double bound = std::abs(expr.constant);
  for (const auto& t : expr.terms) {
    const auto& v = p.variables().at(t.var);
    bound += std::abs(t.coef) * std::max(std::abs(v.lb), std::abs(v.ub));
  }
  const int t = p.add_continuous(0.0, bound, std::move(name));
  LinearExpr pos = expr;
  pos.add(t, -1.0);
  p.add_constraint(pos, Sense::LessEqual, 0.0);
  LinearExpr neg;
  neg.add(expr, -1.0);
  neg.add(t, -1.0);
  p.add_constraint(neg, Sense::LessEqual, 0.0);
  return t;
}

int add_binary_product(MilpProblem& p, int u, int v, std::string name) {
  const int z = p.add_binary(std::move(name));
  p.add_constraint(LinearExpr().add(z, 1).add(u, -1), Sense::LessEqual, 0.0);
  p.add_constraint(LinearExpr().add(z, 1).add(v, -1), Sense::LessEqual, 0.0);
  p.add_constraint(LinearExpr().add(z, 1).add(u, -1).add(v, -1), Sense::GreaterEqual, -1.0);
  return z;
}

double evaluate_objective(const MilpProblem& p, const std::vector<double>& x) {
  double s = p.objective_constant();
  for (int j = 0; j < p.num_vars(); ++j) s += p.objective()[j] * x[j];
  return s;
}

double max_violation(const MilpProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) {
    const auto& v = p.variables()[j];
    worst = std::max({worst, v.lb - x[j], x[j] - v.ub});
    if (v.binary) worst = std::max(worst, std::min(std::abs(x[j]), std::abs(x[j] - 1.0)));
  }
  for (const auto& c : p.constraints()) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    const double r = lhs - c.rhs;
    if (c.sense == Sense::LessEqual) worst = std::max(worst, r);
    else if (c.sense == Sense::GreaterEqual) worst = std::max(worst, -r);
    else worst = std::max(worst, std::abs(r));
  }
  return worst;
}

namespace {

constexpr double kBig = 1e9;          // stand-in for infinite bounds
constexpr double kPrimalTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kIntTol = 1e-6;

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct BasisSnapshot {
  std::vector<int> basis;
  std::vector<char> at_upper;
};

// Bounded-variable dual simplex on a dense tableau [B⁻¹A | B⁻¹b] with one slack per row.
class DualSimplex {
 public:
  explicit DualSimplex(const MilpProblem& p) {
    n_ = p.num_vars();
    m_ = static_cast<int>(p.constraints().size());
    nt_ = n_ + m_;
    w_ = nt_ + 1;
    a_.assign(static_cast<std::size_t>(m_) * w_, 0.0);
    lb_.resize(nt_);
    ub_.resize(nt_);
    c_.assign(nt_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = std::max(p.variables()[j].lb, -kBig);
      ub_[j] = std::min(p.variables()[j].ub, kBig);
      c_[j] = p.objective()[j];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& con = p.constraints()[i];
      double* row = &a_[static_cast<std::size_t>(i) * w_];
      for (const auto& t : con.terms) row[t.var] += t.coef;
      row[n_ + i] = 1.0;
      row[nt_] = con.rhs;
      const int s = n_ + i;
      switch (con.sense) {
        case Sense::LessEqual: lb_[s] = 0.0; ub_[s] = kBig; break;
        case Sense::Equal: lb_[s] = 0.0; ub_[s] = 0.0; break;
        case Sense::GreaterEqual: lb_[s] = -kBig; ub_[s] = 0.0; break;
      }
    }
    slack_basis();
  }

  int structural() const { return n_; }
  double lb(int j) const { return lb_[j]; }
  double ub(int j) const { return ub_[j]; }
  double value(int j) const { return x_[j]; }
  long iterations() const { return iterations_; }

  void slack_basis() {
    t_ = a_;
    basis_.resize(m_);
    pos_.assign(nt_, -1);
    at_upper_.assign(nt_, 0);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      pos_[n_ + i] = i;
    }
    for (int j = 0; j < n_; ++j) at_upper_[j] = c_[j] < 0 ? 1 : 0;
    recompute();
  }

  BasisSnapshot snapshot() const { return {basis_, at_upper_}; }

  // Moves to a stored basis by exchanging the differing columns; refactors only when that
  // runs into a tiny pivot or the tableau has aged.
  bool load(const BasisSnapshot& s) {
    std::vector<char> want(nt_, 0);
    for (int v : s.basis) want[v] = 1;
    std::vector<int> free_rows;
    for (int i = 0; i < m_; ++i)
      if (!want[basis_[i]]) free_rows.push_back(i);
    bool ok = true;
    for (int v : s.basis) {
      if (pos_[v] >= 0) continue;
      int best = -1;
      double bv = 1e-7;
      for (std::size_t k = 0; k < free_rows.size(); ++k) {
        const double a = std::abs(t_[idx(free_rows[k], v)]);
        if (a > bv) {
          bv = a;
          best = static_cast<int>(k);
        }
      }
      if (best < 0) {
        ok = false;
        break;
      }
      exchange(free_rows[best], v);
      free_rows.erase(free_rows.begin() + best);
      ++aged_;
    }
    at_upper_ = s.at_upper;
    if (!ok || aged_ >= 100) {
      aged_ = 0;
      basis_ = s.basis;
      if (!refactor()) {
        slack_basis();
        return false;
      }
    }
    recompute();
    return true;
  }

  void set_bounds(int j, double l, double u) {
    lb_[j] = l;
    ub_[j] = u;
    if (pos_[j] < 0) {
      const double nv = at_upper_[j] ? ub_[j] : lb_[j];
      const double delta = nv - x_[j];
      if (delta != 0.0) {
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= t_[idx(i, j)] * delta;
        x_[j] = nv;
      }
    }
  }

  LpStatus solve(long max_iter) {
    fix_dual_infeasibility();
    int degenerate = 0;
    for (long it = 0; it < max_iter; ++it) {
      const bool bland = degenerate > 50;
      int r = -1;
      double worst = 0.0;
      bool to_lower = false;
      for (int i = 0; i < m_; ++i) {
        const int v = basis_[i];
        const double tol = kPrimalTol * (1.0 + std::abs(x_[v]));
        double inf = 0.0;
        bool low = false;
        if (x_[v] < lb_[v] - tol) {
          inf = lb_[v] - x_[v];
          low = true;
        } else if (x_[v] > ub_[v] + tol) {
          inf = x_[v] - ub_[v];
        } else {
          continue;
        }
        const bool better = r < 0 || (bland ? v < basis_[r] : inf > worst);
        if (better) {
          r = i;
          worst = inf;
          to_lower = low;
        }
      }
      if (r < 0) return LpStatus::Optimal;

      const double* row = &t_[idx(r, 0)];
      int enter = -1;
      double best_ratio = kInf, best_alpha = 0.0;
      for (int j = 0; j < nt_; ++j) {
        if (pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
        const double alpha = row[j];
        if (std::abs(alpha) <= kPivotTol) continue;
        // Leaving variable must increase when going to its lower bound.
        const bool increases_leaving = at_upper_[j] ? alpha > 0 : alpha < 0;
        if (increases_leaving != to_lower) continue;
        const double ratio = std::abs(d_[j]) / std::abs(alpha);
        bool take;
        if (enter < 0) {
          take = true;
        } else if (ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12) {
          take = !bland && std::abs(alpha) > std::abs(best_alpha) * (1 + 1e-9);
        } else {
          take = false;
        }
        if (take) {
          enter = j;
          best_ratio = ratio;
          best_alpha = alpha;
        }
      }
      if (enter < 0) return LpStatus::Infeasible;
      degenerate = best_ratio <= 1e-12 ? degenerate + 1 : 0;
      pivot(r, enter, to_lower);
      ++iterations_;
      if (++aged_ >= 100) {
        aged_ = 0;
        if (refactor()) recompute();
        fix_dual_infeasibility();
      }
    }
    return LpStatus::IterationLimit;
  }

  double objective() const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += c_[j] * x_[j];
    return s;
  }

  bool hits_artificial_bound() const {
    for (int j = 0; j < n_; ++j)
      if (std::abs(x_[j]) >= 0.5 * kBig) return true;
    return false;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * w_ + j; }

  void exchange(int r, int enter) {
    double* prow = &t_[idx(r, 0)];
    const double inv = 1.0 / prow[enter];
    nz_.clear();
    for (int j = 0; j < w_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[enter] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[idx(i, 0)];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (int j : nz_) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    pos_[basis_[r]] = -1;
    basis_[r] = enter;
    pos_[enter] = r;
  }

  void pivot(int r, int enter, bool to_lower) {
    const int leave = basis_[r];
    const double target = to_lower ? lb_[leave] : ub_[leave];
    const double alpha = t_[idx(r, enter)];
    const double step = (x_[leave] - target) / alpha;
    x_[enter] += step;
    for (int i = 0; i < m_; ++i)
      if (i != r) x_[basis_[i]] -= t_[idx(i, enter)] * step;
    x_[leave] = target;

    double* prow = &t_[idx(r, 0)];
    const double inv = 1.0 / alpha;
    nz_.clear();
    for (int j = 0; j < w_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[enter] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[idx(i, 0)];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (int j : nz_) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    const double dj = d_[enter];
    if (dj != 0.0) {
      for (int j : nz_)
        if (j < nt_) d_[j] -= dj * prow[j];
    }
    d_[enter] = 0.0;

    basis_[r] = enter;
    pos_[enter] = r;
    pos_[leave] = -1;
    at_upper_[leave] = to_lower ? 0 : 1;
    at_upper_[enter] = 0;
  }

  // Gauss-Jordan on the original rows for the current basis columns.
  bool refactor() {
    std::vector<double> t = a_;
    std::vector<int> row_of(m_, -1);
    std::vector<char> used(m_, 0);
    // Slack columns are unit vectors in the original rows, so they go first at no cost.
    std::vector<int> order(m_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_partition(order.begin(), order.end(), [&](int k) { return basis_[k] >= n_; });
    for (int k : order) {
      const int col = basis_[k];
      int best = -1;
      double bv = 1e-11;
      for (int i = 0; i < m_; ++i) {
        if (used[i]) continue;
        const double v = std::abs(t[idx(i, col)]);
        if (v > bv) {
          bv = v;
          best = i;
        }
      }
      if (best < 0) return false;
      used[best] = 1;
      row_of[k] = best;
      double* prow = &t[idx(best, 0)];
      const double inv = 1.0 / prow[col];
      nz_.clear();
      for (int j = 0; j < w_; ++j) {
        if (prow[j] != 0.0) {
          prow[j] *= inv;
          nz_.push_back(j);
        }
      }
      prow[col] = 1.0;
      for (int i = 0; i < m_; ++i) {
        if (i == best) continue;
        double* row = &t[idx(i, 0)];
        const double f = row[col];
        if (f == 0.0) continue;
        for (int j : nz_) row[j] -= f * prow[j];
        row[col] = 0.0;
      }
    }
    // Reorder rows so that row k holds basis_[k].
    t_.assign(t.size(), 0.0);
    for (int k = 0; k < m_; ++k)
      std::copy_n(&t[idx(row_of[k], 0)], w_, &t_[idx(k, 0)]);
    pos_.assign(nt_, -1);
    for (int k = 0; k < m_; ++k) pos_[basis_[k]] = k;
    return true;
  }

  void recompute() {
    x_.assign(nt_, 0.0);
    for (int j = 0; j < nt_; ++j)
      if (pos_[j] < 0) x_[j] = at_upper_[j] ? ub_[j] : lb_[j];
    for (int i = 0; i < m_; ++i) {
      const double* row = &t_[idx(i, 0)];
      double v = row[nt_];
      for (int j = 0; j < nt_; ++j)
        if (pos_[j] < 0 && row[j] != 0.0 && x_[j] != 0.0) v -= row[j] * x_[j];
      x_[basis_[i]] = v;
    }
    d_ = c_;
    for (int i = 0; i < m_; ++i) {
      const double cb = c_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &t_[idx(i, 0)];
      for (int j = 0; j < nt_; ++j) d_[j] -= cb * row[j];
    }
    for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  // Nonbasic variables sitting on the wrong side are moved to the bound their reduced cost
  // prefers; all bounds are finite so this keeps the dual feasible.
  void fix_dual_infeasibility() {
    for (int j = 0; j < nt_; ++j) {
      if (pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
      const bool want_upper = d_[j] < 0;
      if (want_upper != static_cast<bool>(at_upper_[j]) && std::abs(d_[j]) > 1e-11) {
        at_upper_[j] = want_upper ? 1 : 0;
        const double nv = want_upper ? ub_[j] : lb_[j];
        const double delta = nv - x_[j];
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= t_[idx(i, j)] * delta;
        x_[j] = nv;
      }
    }
  }

  int n_ = 0, m_ = 0, nt_ = 0, w_ = 0;
  std::vector<double> a_, t_, lb_, ub_, c_, x_, d_;
  std::vector<int> basis_, pos_, nz_;
  std::vector<char> at_upper_;
  long iterations_ = 0;
  int aged_ = 0;
};

struct Node {
  double bound;
  long id;
  std::vector<std::pair<int, double>> fixes;  // binary var -> value
  std::shared_ptr<BasisSnapshot> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpProblem& p, std::uint64_t seed)
      : p_(p), lp_(p), rng_(seed), start_(std::chrono::steady_clock::now()) {
    for (int j = 0; j < p.num_vars(); ++j) {
      if (p.variables()[j].binary) binaries_.push_back(j);
      root_lb_.push_back(lp_.lb(j));
      root_ub_.push_back(lp_.ub(j));
    }
    max_iter_ = 50L * (p.num_vars() + static_cast<long>(p.constraints().size())) + 1000;
  }

  MilpSolution run() {
    MilpSolution sol;
    const LpStatus root = lp_.solve(max_iter_);
    if (root == LpStatus::Infeasible) {
      sol.status = Status::Infeasible;
      sol.lp_iterations = lp_.iterations();
      return sol;
    }
    if (root == LpStatus::Optimal && lp_.hits_artificial_bound()) {
      sol.status = Status::Unbounded;
      sol.lp_iterations = lp_.iterations();
      return sol;
    }
    const double root_obj = lp_.objective();
    const BasisSnapshot root_basis = lp_.snapshot();

    if (!p_.mip_start.empty() && static_cast<int>(p_.mip_start.size()) == p_.num_vars()) {
      std::vector<std::pair<int, double>> fixes;
      for (int j : binaries_) fixes.push_back({j, p_.mip_start[j] >= 0.5 ? 1.0 : 0.0});
      try_fixing(fixes, root_basis);
    }
    if (root == LpStatus::Optimal) {
      std::vector<std::pair<int, double>> fixes;
      for (int j : binaries_) fixes.push_back({j, lp_.value(j) >= 0.5 ? 1.0 : 0.0});
      const std::vector<double> relax = current_values();
      try_fixing(fixes, root_basis);
      for (int rep = 0; rep < 3; ++rep) {
        fixes.clear();
        for (int j : binaries_) fixes.push_back({j, rng_.uniform() < relax[j] ? 1.0 : 0.0});
        try_fixing(fixes, root_basis);
      }
    }

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push({root_obj, next_id_++, {}, std::make_shared<BasisSnapshot>(root_basis)});
    bool limit_hit = false;
    while (!open.empty()) {
      if (limit_reached()) {
        limit_hit = true;
        break;
      }
      Node node = open.top();
      open.pop();
      if (node.bound >= cutoff()) continue;
      restore(node);
      // Plunge: keep following one child on the live tableau.
      for (;;) {
        ++nodes_;
        const LpStatus st = lp_.solve(max_iter_);
        if (st == LpStatus::IterationLimit) {
          incomplete_ = true;
          break;
        }
        if (st == LpStatus::Infeasible) break;
        const double obj = lp_.objective();
        if (obj >= cutoff()) break;
        const int k = most_fractional();
        if (k < 0) {
          offer(current_values());
          break;
        }
        const double v = lp_.value(k);
        const double up_first = v >= 0.5;
        auto snap = std::make_shared<BasisSnapshot>(lp_.snapshot());
        Node other{obj, next_id_++, node.fixes, snap};
        other.fixes.push_back({k, up_first ? 0.0 : 1.0});
        open.push(std::move(other));
        node.fixes.push_back({k, up_first ? 1.0 : 0.0});
        node.bound = obj;
        const double fv = up_first ? 1.0 : 0.0;
        lp_.set_bounds(k, fv, fv);
        if (limit_reached()) {
          open.push(node);
          limit_hit = true;
          break;
        }
      }
      if (limit_hit) break;
    }

    sol.nodes = nodes_;
    sol.lp_iterations = lp_.iterations();
    double open_bound = kInf;
    if (limit_hit || incomplete_) {
      while (!open.empty()) {
        open_bound = std::min(open_bound, open.top().bound);
        open.pop();
      }
      open_bound = std::min(open_bound, root_obj);
    }
    if (incumbent_.empty()) {
      sol.status = (limit_hit || incomplete_) ? Status::Timeout : Status::Infeasible;
      sol.bound = limit_hit ? open_bound : kInf;
      return sol;
    }
    sol.values = incumbent_;
    sol.objective = evaluate_objective(p_, incumbent_);
    if (limit_hit || incomplete_) {
      sol.status = Status::FeasibleTimeout;
      sol.bound = std::min(open_bound, sol.objective);
      if (sol.objective - sol.bound <= gap_tol()) sol.status = Status::Optimal;
    } else {
      sol.status = Status::Optimal;
      sol.bound = sol.objective;
    }
    return sol;
  }

 private:
  double gap_tol() const {
    const double inc = incumbent_.empty() ? 0.0 : incumbent_obj_;
    return std::max(p_.mip_gap, 1e-9) * (1.0 + std::abs(inc));
  }
  double cutoff() const { return incumbent_.empty() ? kInf : incumbent_obj_ - gap_tol(); }

  bool limit_reached() const {
    if (nodes_ >= p_.node_limit) return true;
    if (std::isfinite(p_.time_limit_seconds)) {
      const double el =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (el >= p_.time_limit_seconds) return true;
    }
    return false;
  }

  std::vector<double> current_values() const {
    std::vector<double> x(p_.num_vars());
    for (int j = 0; j < p_.num_vars(); ++j) x[j] = lp_.value(j);
    return x;
  }

  int most_fractional() const {
    int best = -1;
    double best_dist = 2.0;
    for (int j : binaries_) {
      const double v = lp_.value(j);
      const double frac = v - std::floor(v);
      if (frac <= kIntTol || frac >= 1.0 - kIntTol) continue;
      const double dist = std::abs(frac - 0.5);
      if (dist < best_dist - 1e-12) {
        best_dist = dist;
        best = j;
      }
    }
    return best;
  }

  void restore(const Node& node) {
    for (int j : binaries_) lp_.set_bounds(j, root_lb_[j], root_ub_[j]);
    for (const auto& [j, v] : node.fixes) lp_.set_bounds(j, v, v);
    lp_.load(*node.basis);
  }

  void offer(std::vector<double> x) {
    for (int j : binaries_) x[j] = std::round(x[j]);
    if (max_violation(p_, x) > 1e-6) return;
    const double obj = evaluate_objective(p_, x);
    if (incumbent_.empty() || obj < incumbent_obj_ - 1e-12) {
      incumbent_ = std::move(x);
      incumbent_obj_ = obj;
    }
  }

  void try_fixing(const std::vector<std::pair<int, double>>& fixes, const BasisSnapshot& basis) {
    DualSimplex saved = lp_;
    for (const auto& [j, v] : fixes) lp_.set_bounds(j, v, v);
    lp_.load(basis);
    if (lp_.solve(max_iter_) == LpStatus::Optimal) offer(current_values());
    const long its = lp_.iterations();
    lp_ = std::move(saved);
    (void)its;
  }

  const MilpProblem& p_;
  DualSimplex lp_;
  Rng rng_;
  std::chrono::steady_clock::time_point start_;
  std::vector<int> binaries_;
  std::vector<double> root_lb_, root_ub_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  long nodes_ = 0;
  long next_id_ = 0;
  long max_iter_ = 0;
  bool incomplete_ = false;
};

std::string lp_name(const MilpProblem& p, int j) {
  const auto& n = p.variables()[j].name;
  return n.empty() ? "x" + std::to_string(j) : n;
}

void lp_terms(std::ostringstream& s, const MilpProblem& p, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    s << (t.coef < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    const double a = std::abs(t.coef);
    if (a != 1.0) s << a << ' ';
    s << lp_name(p, t.var);
    first = false;
  }
  if (first) s << "0";
}

}  // namespace

MilpSolution solve(const MilpProblem& problem, std::uint64_t seed) {
  problem.validate();
  BranchAndBound bb(problem, seed);
  return bb.run();
}

std::string to_lp_format(const MilpProblem& p) {
  std::ostringstream s;
  s.precision(17);
  s << "Minimize\n obj: ";
  std::vector<Term> obj;
  for (int j = 0; j < p.num_vars(); ++j)
    if (p.objective()[j] != 0.0) obj.push_back({j, p.objective()[j]});
  lp_terms(s, p, obj);
  if (p.objective_constant() != 0.0)
    s << (p.objective_constant() < 0 ? " - " : " + ") << std::abs(p.objective_constant());
  s << "\nSubject To\n";
  for (std::size_t i = 0; i < p.constraints().size(); ++i) {
    const auto& c = p.constraints()[i];
    s << ' ' << (c.name.empty() ? "c" + std::to_string(i) : c.name) << ": ";
    lp_terms(s, p, c.terms);
    s << (c.sense == Sense::LessEqual ? " <= " : c.sense == Sense::Equal ? " = " : " >= ") << c.rhs
      << '\n';
  }
  s << "Bounds\n";
  for (int j = 0; j < p.num_vars(); ++j) {
    const auto& v = p.variables()[j];
    if (v.binary) continue;
    s << ' ';
    if (std::isinf(v.lb) && std::isinf(v.ub)) {
      s << lp_name(p, j) << " free\n";
      continue;
    }
    if (std::isinf(v.lb)) s << "-inf"; else s << v.lb;
    s << " <= " << lp_name(p, j) << " <= ";
    if (std::isinf(v.ub)) s << "+inf"; else s << v.ub;
    s << '\n';
  }
  s << "Binaries\n";
  for (int j = 0; j < p.num_vars(); ++j)
    if (p.variables()[j].binary) s << ' ' << lp_name(p, j) << '\n';
  s << "End\n";
  return s.str();
}

}  // namespace atmplace::milp
