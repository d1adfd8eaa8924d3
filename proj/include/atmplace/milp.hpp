#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "atmplace/errors.hpp"

namespace atmplace::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

// Timeout means the limit was hit before any feasible point was found.
enum class Status { Optimal, FeasibleTimeout, Infeasible, Unbounded, Timeout };
std::string status_name(Status s);

struct Term {
  int var;
  double coef;
};

struct LinearExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  LinearExpr() = default;
  LinearExpr& add(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
    return *this;
  }
  LinearExpr& add(const LinearExpr& o, double scale = 1.0) {
    for (const auto& t : o.terms) add(t.var, scale * t.coef);
    constant += scale * o.constant;
    return *this;
  }
  LinearExpr& add_constant(double c) {
    constant += c;
    return *this;
  }
};

struct Variable {
  double lb = 0.0;
  double ub = kInf;
  bool binary = false;
  std::string name;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

class MilpProblem {
 public:
  int add_continuous(double lb, double ub, std::string name = {});
  int add_binary(std::string name = {});
  // lhs.constant is moved to the right-hand side. Duplicate variables are merged.
  void add_constraint(const LinearExpr& lhs, Sense sense, double rhs, std::string name = {});
  void set_objective(const LinearExpr& obj);
  void add_objective(int var, double coef);
  void add_objective(const LinearExpr& expr, double scale = 1.0);

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return obj_const_; }
  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_binaries() const;
  void set_bounds(int var, double lb, double ub);

  // Throws ValidationError on malformed input.
  void validate() const;

  // Solver controls.
  double time_limit_seconds = kInf;
  double mip_gap = 1e-6;  // relative, on (1 + |incumbent|)
  long node_limit = 2'000'000;
  std::vector<double> mip_start;  // optional, binaries are read from it

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  std::vector<double> obj_;
  double obj_const_ = 0.0;
};

// t ≥ expr and t ≥ -expr; valid only when t is minimized.
int add_abs(MilpProblem& p, const LinearExpr& expr, std::string name = {});
// z = u·v for binaries u, v.
int add_binary_product(MilpProblem& p, int u, int v, std::string name = {});

struct MilpSolution {
  Status status = Status::Infeasible;
  std::vector<double> values;
  double objective = kInf;
  double bound = -kInf;
  long nodes = 0;
  long lp_iterations = 0;
  bool has_solution() const {
    return status == Status::Optimal || status == Status::FeasibleTimeout;
  }
};

MilpSolution solve(const MilpProblem& problem, std::uint64_t seed = 0);

// Largest constraint/bound/integrality violation of `x`.
double max_violation(const MilpProblem& problem, const std::vector<double>& x);
double evaluate_objective(const MilpProblem& problem, const std::vector<double>& x);

// CPLEX LP text: Minimize / Subject To / Bounds / Binaries / End.
std::string to_lp_format(const MilpProblem& problem);

// Adapter point for third-party solvers; none ship with the library.
class ExternalSolver {
 public:
  virtual ~ExternalSolver() = default;
  virtual MilpSolution solve(const MilpProblem& problem) = 0;
};

}  // namespace atmplace::milp
