#include <doctest.h>

#include <cmath>

#include "atmplace/milp.hpp"
#include "milp_oracle.hpp"

using namespace atmplace;
using namespace atmplace::milp;

TEST_CASE("lp corner") {
  MilpProblem p;
  const int x = p.add_continuous(0, 3);
  p.set_objective(LinearExpr().add(x, -1));
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.values[x] == doctest::Approx(3));
  CHECK(s.objective == doctest::Approx(-3));
}

TEST_CASE("knapsack matches enumeration") {
  const double w[5] = {3, 4, 2, 5, 1}, v[5] = {4, 5, 3, 7, 1};
  MilpProblem p;
  LinearExpr cap, obj;
  for (int i = 0; i < 5; ++i) {
    const int b = p.add_binary();
    cap.add(b, w[i]);
    obj.add(b, -v[i]);
  }
  p.add_constraint(cap, Sense::LessEqual, 7);
  p.set_objective(obj);
  double best = 0;
  for (int m = 0; m < 32; ++m) {
    double ww = 0, vv = 0;
    for (int i = 0; i < 5; ++i)
      if (m >> i & 1) ww += w[i], vv += v[i];
    if (ww <= 7) best = std::max(best, vv);
  }
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(-s.objective == doctest::Approx(best));
  CHECK(max_violation(p, s.values) <= 1e-6);
}

TEST_CASE("infeasible and unbounded") {
  MilpProblem p;
  const int x = p.add_continuous(0, kInf), y = p.add_continuous(0, kInf);
  p.add_constraint(LinearExpr().add(x, 1).add(y, 1), Sense::LessEqual, 1);
  p.add_constraint(LinearExpr().add(x, 1), Sense::GreaterEqual, 2);
  CHECK(solve(p).status == Status::Infeasible);

  MilpProblem q;
  const int z = q.add_continuous(0, kInf);
  q.set_objective(LinearExpr().add(z, -1));
  CHECK(solve(q).status == Status::Unbounded);
}

TEST_CASE("add_abs") {
  for (double fix : {3.0, -3.0}) {
    MilpProblem p;
    const int x = p.add_continuous(fix, fix);
    const int t = add_abs(p, LinearExpr().add(x, 1));
    p.set_objective(LinearExpr().add(t, 1));
    const auto s = solve(p);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.values[t] == doctest::Approx(3));
  }
  MilpProblem p;
  const int x = p.add_continuous(-1, 2);
  const int t = add_abs(p, LinearExpr().add(x, 1));
  p.set_objective(LinearExpr().add(t, 1));
  const auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("binary product truth table") {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (double dir : {1.0, -1.0}) {
        MilpProblem p;
        const int u = p.add_binary(), v = p.add_binary();
        p.set_bounds(u, a, a);
        p.set_bounds(v, b, b);
        const int z = add_binary_product(p, u, v);
        // push z both ways: the constraints alone must pin it
        p.set_objective(LinearExpr().add(z, dir));
        const auto s = solve(p);
        REQUIRE(s.status == Status::Optimal);
        CHECK(s.values[z] == doctest::Approx(a * b));
      }
}

TEST_CASE("random problems match enumeration") {
  Rng rng(17);
  int feasible = 0;
  for (int k = 0; k < 40; ++k) {
    const int nb = rng.uniform_int(1, 10);
    const auto p = checks::random_milp(rng, nb, 0, rng.uniform_int(1, 6));
    const auto ref = checks::enumerate_milp(p);
    const auto s = solve(p, 3);
    if (!ref.feasible) {
      CHECK(s.status == Status::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.objective - ref.objective) <= 1e-6 * (1 + std::abs(ref.objective)));
    CHECK(max_violation(p, s.values) <= 1e-6);
    CHECK(s.bound <= s.objective + 1e-9);
    CHECK(evaluate_objective(p, s.values) == doctest::Approx(s.objective));
  }
  CHECK(feasible >= 10);
}

TEST_CASE("solve is deterministic") {
  Rng rng(4);
  const auto p = checks::random_milp(rng, 14, 0, 5);
  const auto a = solve(p, 9), b = solve(p, 9);
  CHECK(a.nodes == b.nodes);
  CHECK(a.values == b.values);
  CHECK(a.objective == b.objective);
}

TEST_CASE("node limit returns incumbent or timeout") {
  Rng rng(8);
  auto p = checks::random_milp(rng, 20, 0, 8);
  p.node_limit = 1;
  const auto s = solve(p);
  CHECK((s.status == Status::FeasibleTimeout || s.status == Status::Timeout ||
         s.status == Status::Optimal || s.status == Status::Infeasible));
  if (s.has_solution()) {
    CHECK(max_violation(p, s.values) <= 1e-6);
    CHECK(s.bound <= s.objective + 1e-9);
  }
}

TEST_CASE("validation") {
  MilpProblem p;
  const int x = p.add_continuous(2, 1);
  p.set_objective(LinearExpr().add(x, 1));
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(solve(p), ValidationError);

  MilpProblem q;
  q.add_continuous(0, 1);
  q.add_constraint(LinearExpr().add(5, 1.0), Sense::LessEqual, 1);
  CHECK_THROWS_AS(q.validate(), ValidationError);
}

TEST_CASE("lp text dump") {
  MilpProblem p;
  const int x = p.add_continuous(0, 4, "x");
  const int b = p.add_binary("b");
  p.add_constraint(LinearExpr().add(x, 1).add(b, 2), Sense::LessEqual, 5, "cap");
  p.set_objective(LinearExpr().add(x, -1).add(b, -3));
  const auto lp = to_lp_format(p);
  for (const char* s : {"Minimize", "Subject To", "Bounds", "Binaries", "End", "cap:", "<= 5"})
    CHECK(lp.find(s) != std::string::npos);
  CHECK(lp.find("Binaries\n b\n") != std::string::npos);
}
