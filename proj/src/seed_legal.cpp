#include "atmplace/seed_legal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "atmplace/benchmark.hpp"

namespace atmplace {

using milp::LinearExpr;
using milp::MilpProblem;
using milp::Sense;

std::pair<int, int> orientation_to_uv(int orient) {
  switch (orient & 3) {
    case 0: return {0, 0};
    case 1: return {0, 1};
    case 2: return {1, 1};
    default: return {1, 0};
  }
}

int uv_to_orientation(int u, int v) {
  if (u == 0) return v == 0 ? 0 : 1;
  return v == 1 ? 2 : 3;
}

namespace {

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

bool bit(double v) { return v >= 0.5; }

// Index k of the first disjunct a legal-enough pair satisfies: 0 i left of j, 1 i right of j,
// 2 i below j, 3 i above j. Returns the one with the largest slack.
int separating_side(const ChipletPose& a, Vec2 da, const ChipletPose& b, Vec2 db) {
  const double gaps[4] = {b.x - a.x - 0.5 * (da.x + db.x), a.x - b.x - 0.5 * (da.x + db.x),
                          b.y - a.y - 0.5 * (da.y + db.y), a.y - b.y - 0.5 * (da.y + db.y)};
  return static_cast<int>(std::max_element(gaps, gaps + 4) - gaps);
}

std::vector<double> zero_values(const MilpProblem& p) {
  std::vector<double> v(p.num_vars(), 0.0);
  for (int j = 0; j < p.num_vars(); ++j) v[j] = std::max(0.0, p.variables()[j].lb);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------- init

InitFormulation build_init_milp(const DesignInstance& design, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw DomainError("epsilon must lie in [0, 0.5)");
  InitFormulation f;
  f.epsilon = epsilon;
  MilpProblem& p = f.problem;
  const int n = design.size();
  const double W = design.interposer().width;
  const double H = design.interposer().height;

  for (int i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    f.x.push_back(p.add_continuous(0.0, W, "x" + s));
    f.y.push_back(p.add_continuous(0.0, H, "y" + s));
    f.u.push_back(p.add_binary("u" + s));
    f.v.push_back(p.add_binary("v" + s));
    f.z.push_back(milp::add_binary_product(p, f.u[i], f.v[i], "z" + s));
  }

  // w'_i = (1 - u - v + 2z) w + (u + v - 2z) h, h'_i symmetric.
  auto wdim = [&](int i, double scale) {
    const auto& c = design.chiplet(i);
    LinearExpr e;
    e.add_constant(scale * c.width);
    e.add(f.u[i], scale * (c.height - c.width));
    e.add(f.v[i], scale * (c.height - c.width));
    e.add(f.z[i], scale * 2.0 * (c.width - c.height));
    return e;
  };
  auto hdim = [&](int i, double scale) {
    const auto& c = design.chiplet(i);
    LinearExpr e;
    e.add_constant(scale * c.height);
    e.add(f.u[i], scale * (c.width - c.height));
    e.add(f.v[i], scale * (c.width - c.height));
    e.add(f.z[i], scale * 2.0 * (c.height - c.width));
    return e;
  };

  for (int i = 0; i < n; ++i) {
    LinearExpr lo = LinearExpr().add(f.x[i], 1.0).add(wdim(i, -0.5));
    p.add_constraint(lo, Sense::GreaterEqual, 0.0);
    LinearExpr hi = LinearExpr().add(f.x[i], 1.0).add(wdim(i, 0.5));
    p.add_constraint(hi, Sense::LessEqual, W);
    LinearExpr blo = LinearExpr().add(f.y[i], 1.0).add(hdim(i, -0.5));
    p.add_constraint(blo, Sense::GreaterEqual, 0.0);
    LinearExpr bhi = LinearExpr().add(f.y[i], 1.0).add(hdim(i, 0.5));
    p.add_constraint(bhi, Sense::LessEqual, H);
  }

  const double k = 0.5 + epsilon;
  f.pairs = all_pairs(n);
  for (const auto& [i, j] : f.pairs) {
    std::array<int, 4> d{};
    const std::string s = std::to_string(i) + "_" + std::to_string(j);
    for (int q = 0; q < 4; ++q) d[q] = p.add_binary("d" + s + "_" + std::to_string(q));
    const auto& ci = design.chiplet(i);
    const auto& cj = design.chiplet(j);
    const double span = epsilon * (std::max(ci.width, ci.height) + std::max(cj.width, cj.height));
    const double mx = W + span;
    const double my = H + span;
    // x_j - x_i >= k (w'_i + w'_j) - Mx δ0, and so on.
    const int sides[4][3] = {{0, 1, -1}, {0, -1, 1}, {1, 1, -1}, {1, -1, 1}};
    for (int q = 0; q < 4; ++q) {
      const bool is_y = sides[q][0] == 1;
      const auto& vi = is_y ? f.y[i] : f.x[i];
      const auto& vj = is_y ? f.y[j] : f.x[j];
      LinearExpr e;
      e.add(vj, sides[q][1]);
      e.add(vi, sides[q][2]);
      e.add(is_y ? hdim(i, -k) : wdim(i, -k));
      e.add(is_y ? hdim(j, -k) : wdim(j, -k));
      e.add(d[q], is_y ? my : mx);
      p.add_constraint(e, Sense::GreaterEqual, 0.0, "sep" + s + "_" + std::to_string(q));
    }
    LinearExpr sum;
    for (int q = 0; q < 4; ++q) sum.add(d[q], 1.0);
    p.add_constraint(sum, Sense::LessEqual, 3.0);
    f.delta.push_back(d);
  }

  // Clump position X_ij = x_i + (1 - u - v) Ox - (v - u) Oy, Y_ij = y_i + (v - u) Ox + (1 - u - v) Oy.
  auto clump_x = [&](int i, int j) {
    const Vec2 o = design.clump_offset(i, j);
    LinearExpr e;
    e.add(f.x[i], 1.0).add_constant(o.x);
    e.add(f.u[i], -o.x + o.y).add(f.v[i], -o.x - o.y);
    return e;
  };
  auto clump_y = [&](int i, int j) {
    const Vec2 o = design.clump_offset(i, j);
    LinearExpr e;
    e.add(f.y[i], 1.0).add_constant(o.y);
    e.add(f.u[i], -o.x - o.y).add(f.v[i], o.x - o.y);
    return e;
  };
  for (const auto& [i, j] : design.connected_pairs()) {
    const double a = design.net_count(i, j);
    const std::string s = std::to_string(i) + "_" + std::to_string(j);
    LinearExpr dx = clump_x(i, j);
    dx.add(clump_x(j, i), -1.0);
    LinearExpr dy = clump_y(i, j);
    dy.add(clump_y(j, i), -1.0);
    p.add_objective(milp::add_abs(p, dx, "ax" + s), a);
    p.add_objective(milp::add_abs(p, dy, "ay" + s), a);
  }
  return f;
}

Placement InitFormulation::decode(const std::vector<double>& values) const {
  Placement out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int o = uv_to_orientation(bit(values[u[i]]), bit(values[v[i]]));
    out[i] = {values[x[i]], values[y[i]], kOrientations[o]};
  }
  return out;
}

std::vector<double> InitFormulation::encode(const DesignInstance& design,
                                            const Placement& placement) const {
  std::vector<double> vals = zero_values(problem);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [ui, vi] = orientation_to_uv(orientation_index(placement[i].theta));
    vals[x[i]] = placement[i].x;
    vals[y[i]] = placement[i].y;
    vals[u[i]] = ui;
    vals[v[i]] = vi;
    vals[z[i]] = ui * vi;
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const int side = separating_side(placement[i], rotated_dims(design.chiplet(i), placement[i].theta),
                                     placement[j], rotated_dims(design.chiplet(j), placement[j].theta));
    for (int q = 0; q < 4; ++q) vals[delta[k][q]] = q == side ? 0.0 : 1.0;
  }
  return vals;
}

// ---------------------------------------------------------------------------- legalize

namespace {

// Rotated offset of the pin on chiplet `c` at the orientation frozen in `ref`.
Vec2 frozen_pin(const DesignInstance& design, const Placement& ref, const PinRef& pin) {
  const BumpPin& b = design.pin(pin);
  return rotate_offset(b.x, b.y, orientation_index(ref[pin.chiplet].theta));
}

}  // namespace

LegalizeFormulation build_legalize_milp(const DesignInstance& design, const Placement& opt,
                                        double lambda_w) {
  if (lambda_w < 0) throw DomainError("lambda_w must be >= 0");
  if (opt.size() != design.chiplets().size()) throw ValidationError("placement size mismatch");
  for (const auto& pose : opt) orientation_index(pose.theta);

  LegalizeFormulation f;
  f.lambda_w = lambda_w;
  f.reference = opt;
  MilpProblem& p = f.problem;
  const int n = design.size();
  const double W = design.interposer().width;
  const double H = design.interposer().height;
  const double gap = design.interposer().min_spacing + kLegalMargin;

  std::vector<Vec2> dims(n);
  for (int i = 0; i < n; ++i) {
    dims[i] = rotated_dims(design.chiplet(i), opt[i].theta);
    const std::string s = std::to_string(i);
    f.x.push_back(p.add_continuous(0.5 * dims[i].x, W - 0.5 * dims[i].x, "x" + s));
    f.y.push_back(p.add_continuous(0.5 * dims[i].y, H - 0.5 * dims[i].y, "y" + s));
    if (dims[i].x > W || dims[i].y > H)
      throw InfeasibleLegalization("chiplet " + s + " does not fit the interposer");
  }

  f.pairs = all_pairs(n);
  for (const auto& [i, j] : f.pairs) {
    std::array<int, 4> d{};
    const std::string s = std::to_string(i) + "_" + std::to_string(j);
    for (int q = 0; q < 4; ++q) d[q] = p.add_binary("d" + s + "_" + std::to_string(q));
    const double sx = 0.5 * (dims[i].x + dims[j].x) + gap;
    const double sy = 0.5 * (dims[i].y + dims[j].y) + gap;
    const double mx = W + gap;
    const double my = H + gap;
    p.add_constraint(LinearExpr().add(f.x[j], 1).add(f.x[i], -1).add(d[0], mx), Sense::GreaterEqual, sx);
    p.add_constraint(LinearExpr().add(f.x[i], 1).add(f.x[j], -1).add(d[1], mx), Sense::GreaterEqual, sx);
    p.add_constraint(LinearExpr().add(f.y[j], 1).add(f.y[i], -1).add(d[2], my), Sense::GreaterEqual, sy);
    p.add_constraint(LinearExpr().add(f.y[i], 1).add(f.y[j], -1).add(d[3], my), Sense::GreaterEqual, sy);
    p.add_constraint(LinearExpr().add(d[0], 1).add(d[1], 1).add(d[2], 1).add(d[3], 1),
                     Sense::LessEqual, 3.0);
    f.delta.push_back(d);
  }

  for (int i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    p.add_objective(milp::add_abs(p, LinearExpr().add(f.x[i], 1).add_constant(-opt[i].x), "dx" + s), 1.0);
    p.add_objective(milp::add_abs(p, LinearExpr().add(f.y[i], 1).add_constant(-opt[i].y), "dy" + s), 1.0);
  }

  if (lambda_w > 0) {
    // Per connected pair and axis: Σ_n |x_i - x_j + c_n| with c_n the frozen pin offset difference.
    std::map<std::pair<int, int>, std::pair<std::vector<double>, std::vector<double>>> terms;
    for (const Net& e : design.nets()) {
      PinRef a = e.a, b = e.b;
      if (a.chiplet > b.chiplet) std::swap(a, b);
      const Vec2 oa = frozen_pin(design, opt, a);
      const Vec2 ob = frozen_pin(design, opt, b);
      auto& t = terms[{a.chiplet, b.chiplet}];
      t.first.push_back(oa.x - ob.x);
      t.second.push_back(oa.y - ob.y);
    }
    for (auto& [key, cs] : terms) {
      const auto [i, j] = key;
      const std::string s = std::to_string(i) + "_" + std::to_string(j);
      for (int axis = 0; axis < 2; ++axis) {
        const auto& c = axis == 0 ? cs.first : cs.second;
        const double extent = axis == 0 ? W : H;
        double bound = 0.0;
        for (double cn : c) bound += extent + std::abs(cn);
        const int t = p.add_continuous(0.0, bound, (axis == 0 ? "wx" : "wy") + s);
        const int vi = axis == 0 ? f.x[i] : f.y[i];
        const int vj = axis == 0 ? f.x[j] : f.y[j];
        // Pieces of the convex function: for each region between sorted breakpoints
        // d = -c_n, slope = #(c_n > -d) - #(c_n < -d), intercept = Σ sign · c_n.
        std::vector<double> sorted = c;
        std::sort(sorted.begin(), sorted.end());
        const int m = static_cast<int>(sorted.size());
        // Region r: the r largest c_n lie "behind" d (d + c_n < 0 fails), i.e. d + c_n > 0
        // holds for the m - r largest values.
        for (int r = 0; r <= m; ++r) {
          if (r > 0 && r < m && std::abs(sorted[r] - sorted[r - 1]) < 1e-12) continue;
          // first r values negative sign, remaining positive
          double slope = 0.0, icpt = 0.0;
          for (int q = 0; q < m; ++q) {
            const double sg = q < r ? -1.0 : 1.0;
            slope += sg;
            icpt += sg * sorted[q];
          }
          LinearExpr e;
          e.add(t, 1.0).add(vi, -slope).add(vj, slope);
          p.add_constraint(e, Sense::GreaterEqual, icpt);
        }
        p.add_objective(t, lambda_w);
      }
    }
  }
  return f;
}

Placement LegalizeFormulation::decode(const std::vector<double>& values) const {
  // LP values may sit a solver tolerance past their bounds
  auto within = [&](int var) {
    const auto& v = problem.variables()[var];
    return std::clamp(values[var], v.lb, v.ub);
  };
  Placement out = reference;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i].x = within(x[i]);
    out[i].y = within(y[i]);
  }
  return out;
}

std::vector<double> LegalizeFormulation::encode(const DesignInstance& design,
                                                const Placement& placement) const {
  std::vector<double> vals = zero_values(problem);
  for (std::size_t i = 0; i < x.size(); ++i) {
    vals[x[i]] = placement[i].x;
    vals[y[i]] = placement[i].y;
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const int side = separating_side(placement[i], rotated_dims(design.chiplet(i), placement[i].theta),
                                     placement[j], rotated_dims(design.chiplet(j), placement[j].theta));
    for (int q = 0; q < 4; ++q) vals[delta[k][q]] = q == side ? 0.0 : 1.0;
  }
  return vals;
}

double displacement(const Placement& a, const Placement& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i].x - b[i].x) + std::abs(a[i].y - b[i].y);
  return s;
}

namespace {

// Shelf packing over a few orientation policies, shelf directions and sort keys. The
// first arrangement that fits wins; order of attempts is fixed so results are stable.
std::optional<Placement> pack_any(const DesignInstance& design, double gap) {
  const int n = design.size();
  const double W = design.interposer().width, H = design.interposer().height;
  for (int policy = 0; policy < 3; ++policy)
    for (int transpose = 0; transpose < 2; ++transpose)
      for (int key = 0; key < 2; ++key) {
        Placement p(n);
        std::vector<Vec2> dm(n);
        for (int i = 0; i < n; ++i) {
          const auto& c = design.chiplet(i);
          bool rot = policy == 1 ? c.height > c.width : policy == 2 ? c.width > c.height : false;
          p[i].theta = rot ? 90.0 : 0.0;
          dm[i] = rot ? Vec2{c.height, c.width} : Vec2{c.width, c.height};
          if (transpose) std::swap(dm[i].x, dm[i].y);
        }
        const double along = transpose ? H : W, across = transpose ? W : H;
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return key == 0 ? dm[a].y > dm[b].y : dm[a].x > dm[b].x;
        });
        double cx = 0.0, sy = 0.0, sh = 0.0;
        bool fits = true;
        for (int i : order) {
          if (dm[i].x > along + 1e-12) { fits = false; break; }
          if (cx > 0.0 && cx + dm[i].x > along + 1e-12) {
            sy += sh + gap;
            cx = 0.0;
            sh = 0.0;
          }
          if (sy + dm[i].y > across + 1e-12) { fits = false; break; }
          const double u = cx + dm[i].x / 2, v = sy + dm[i].y / 2;
          p[i].x = transpose ? v : u;
          p[i].y = transpose ? u : v;
          cx += dm[i].x + gap;
          sh = std::max(sh, dm[i].y);
        }
        if (fits) return p;
      }
  return std::nullopt;
}

template <class GapFn>
std::optional<Placement> greedy_place(const DesignInstance& design, const Placement& opt,
                                      GapFn pair_gap) {
  const int n = design.size();
  const double W = design.interposer().width;
  const double H = design.interposer().height;
  const double step = std::max(design.interposer().min_spacing, 1e-3) / 2.0;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return design.chiplet(a).area() > design.chiplet(b).area();
  });

  Placement out = opt;
  std::vector<int> placed;
  std::vector<Vec2> dims(n);
  for (int i = 0; i < n; ++i) dims[i] = rotated_dims(design.chiplet(i), opt[i].theta);

  for (int i : order) {
    const Vec2 d = dims[i];
    if (d.x > W || d.y > H) return std::nullopt;
    const double lo_x = 0.5 * d.x, hi_x = W - 0.5 * d.x;
    const double lo_y = 0.5 * d.y, hi_y = H - 0.5 * d.y;
    const double ax = std::clamp(opt[i].x, lo_x, hi_x);
    const double ay = std::clamp(opt[i].y, lo_y, hi_y);
    auto ok = [&](double cx, double cy) {
      if (cx < lo_x - 1e-12 || cx > hi_x + 1e-12 || cy < lo_y - 1e-12 || cy > hi_y + 1e-12)
        return false;
      const ChipletPose pose{cx, cy, opt[i].theta};
      for (int j : placed)
        if (rect_separation(pose, d, out[j], dims[j]) < pair_gap(i, j)) return false;
      return true;
    };
    const int max_ring = static_cast<int>(std::ceil(std::max(W, H) / step)) + 1;
    double best = std::numeric_limits<double>::infinity();
    double bx = 0, by = 0;
    for (int r = 0; r <= max_ring; ++r) {
      // Any point on ring r lies at least r·step (L∞) from the anchor.
      const double ring_floor = r * step - (std::abs(ax - opt[i].x) + std::abs(ay - opt[i].y));
      if (ring_floor > best) break;
      auto visit = [&](int gx, int gy) {
        const double cx = ax + gx * step, cy = ay + gy * step;
        const double cost = std::abs(cx - opt[i].x) + std::abs(cy - opt[i].y);
        if (cost < best - 1e-12 && ok(cx, cy)) {
          best = cost;
          bx = cx;
          by = cy;
        }
      };
      if (r == 0) {
        visit(0, 0);
        continue;
      }
      for (int g = -r; g <= r; ++g) {
        visit(g, -r);
        visit(g, r);
      }
      for (int g = -r + 1; g <= r - 1; ++g) {
        visit(-r, g);
        visit(r, g);
      }
    }
    if (!std::isfinite(best)) return std::nullopt;
    out[i].x = bx;
    out[i].y = by;
    placed.push_back(i);
  }
  return out;
}

}  // namespace

std::optional<Placement> greedy_legalize(const DesignInstance& design, const Placement& opt) {
  const double gap = design.interposer().min_spacing + kLegalMargin;
  return greedy_place(design, opt, [gap](int, int) { return gap; });
}

LegalizeResult legalize(const DesignInstance& design, const Placement& opt,
                        const LegalizeConfig& cfg) {
  for (const auto& pose : opt) orientation_index(pose.theta);
  LegalizeResult r;
  if (cfg.lambda_w == 0.0 && check_legal(design, opt).legal()) {
    r.placement = opt;
    r.path = "identity";
    return r;
  }

  const std::optional<Placement> greedy = greedy_legalize(design, opt);
  auto finish = [&](Placement p, std::string path) {
    r.placement = std::move(p);
    r.displacement = displacement(r.placement, opt);
    r.path = std::move(path);
    return r;
  };
  auto greedy_or_throw = [&](const std::string& why) {
    if (greedy && check_legal(design, *greedy).legal()) return finish(*greedy, "greedy");
    throw InfeasibleLegalization(why);
  };

  if (design.size() > cfg.greedy_threshold) return greedy_or_throw("greedy legalization failed");

  auto attempt = [&](double lambda) {
    LegalizeFormulation f = build_legalize_milp(design, opt, lambda);
    f.problem.time_limit_seconds = cfg.time_limit_seconds;
    f.problem.node_limit = cfg.node_limit;
    if (greedy) f.problem.mip_start = f.encode(design, *greedy);
    milp::MilpSolution sol = milp::solve(f.problem, cfg.seed);
    r.nodes += sol.nodes;
    r.status = sol.status;
    std::optional<Placement> out;
    if (sol.has_solution()) {
      Placement p = f.decode(sol.values);
      if (check_legal(design, p).legal()) out = std::move(p);
    }
    return std::make_pair(sol.status, out);
  };

  auto [st, placed] = attempt(cfg.lambda_w);
  if (st == milp::Status::Optimal && placed) return finish(*placed, "milp");
  if (st == milp::Status::Infeasible)
    throw InfeasibleLegalization("legalization MILP is infeasible");
  if (cfg.lambda_w > 0) {
    auto [st0, placed0] = attempt(0.0);
    if (placed0) return finish(*placed0, "milp_lambda0");
    if (st0 == milp::Status::Infeasible)
      throw InfeasibleLegalization("legalization MILP is infeasible");
  } else if (placed) {
    return finish(*placed, "milp");
  }
  return greedy_or_throw("legalization found no feasible placement");
}

InitResult initialize(const DesignInstance& design, const InitConfig& cfg) {
  InitFormulation f = build_init_milp(design, cfg.epsilon);
  f.problem.time_limit_seconds = cfg.time_limit_seconds;
  f.problem.node_limit = cfg.node_limit;
  double max_dim = 0.0;
  for (const auto& c : design.chiplets()) max_dim = std::max({max_dim, c.width, c.height});
  // Compact cluster around the interposer center as the MIP start.
  Placement center(design.size(), {0.5 * design.interposer().width,
                                   0.5 * design.interposer().height, 0.0});
  auto start = greedy_place(design, center, [&](int i, int j) {
    const auto& a = design.chiplet(i);
    const auto& b = design.chiplet(j);
    return cfg.epsilon * (std::max(a.width, a.height) + std::max(b.width, b.height)) + 1e-6;
  });
  if (!start) start = pack_any(design, 2.0 * cfg.epsilon * max_dim + 1e-6);
  if (start) f.problem.mip_start = f.encode(design, *start);

  const milp::MilpSolution sol = milp::solve(f.problem, cfg.seed);
  InitResult r;
  r.status = sol.status;
  r.nodes = sol.nodes;
  if (sol.has_solution()) {
    r.placement = f.decode(sol.values);
    for (int i = 0; i < design.size(); ++i) {
      const Vec2 d = rotated_dims(design.chiplet(i), r.placement[i].theta);
      auto& q = r.placement[i];
      q.x = std::clamp(q.x, 0.5 * d.x, std::max(0.5 * d.x, design.interposer().width - 0.5 * d.x));
      q.y = std::clamp(q.y, 0.5 * d.y, std::max(0.5 * d.y, design.interposer().height - 0.5 * d.y));
    }
    r.objective = sol.objective;
    return r;
  }
  if (sol.status == milp::Status::Unbounded)
    throw DomainError("init MILP reported an unbounded relaxation");
  auto packed = pack_any(design, design.interposer().min_spacing + kLegalMargin);
  // exact-gap shelves still pass the legality check
  if (!packed) packed = pack_any(design, design.interposer().min_spacing);
  if (!packed) throw InfeasibleLegalization("init: no feasible seed placement found");
  r.placement = *packed;
  r.fallback = true;
  return r;
}

}  // namespace atmplace
