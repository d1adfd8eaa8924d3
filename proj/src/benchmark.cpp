#include "atmplace/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "atmplace/rng.hpp"

namespace atmplace {

namespace {

double round_to(double v, double q) { return std::round(v / q) * q; }

enum Edge { kRight = 0, kTop = 1, kLeft = 2, kBottom = 3 };

Edge facing_edge(Vec2 from, Vec2 to) {
  const double dx = to.x - from.x, dy = to.y - from.y;
  if (std::abs(dx) >= std::abs(dy)) return dx >= 0 ? kRight : kLeft;
  return dy >= 0 ? kTop : kBottom;
}

struct Module {
  int partner;
  Edge edge;
  double along_key;
  std::vector<int> pins;  // pin id per lane
};

}  // namespace

double whitespace_fraction(const DesignInstance& d) {
  const auto& ip = d.interposer();
  return 1.0 - d.total_area() / (ip.width * ip.height);
}

std::optional<Placement> shelf_pack(const DesignInstance& design, double gap) {
  const int n = design.size();
  const auto& ip = design.interposer();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return design.chiplet(a).height > design.chiplet(b).height;
  });
  Placement p(n);
  double cursor_x = 0.0, shelf_y = 0.0, shelf_h = 0.0;
  for (int i : order) {
    const auto& c = design.chiplet(i);
    if (c.width > ip.width) return std::nullopt;
    if (cursor_x > 0.0 && cursor_x + c.width > ip.width + 1e-12) {
      shelf_y += shelf_h + gap;
      cursor_x = 0.0;
      shelf_h = 0.0;
    }
    if (shelf_y + c.height > ip.height + 1e-12) return std::nullopt;
    p[i] = {cursor_x + c.width / 2, shelf_y + c.height / 2, 0.0};
    cursor_x += c.width + gap;
    shelf_h = std::max(shelf_h, c.height);
  }
  return p;
}

DesignInstance with_power(const DesignInstance& design, const std::vector<double>& power) {
  auto chiplets = design.chiplets();
  if (power.size() != chiplets.size()) throw DomainError("with_power: size mismatch");
  for (std::size_t i = 0; i < chiplets.size(); ++i) chiplets[i].power_density = power[i];
  return DesignInstance(design.interposer(), std::move(chiplets), design.nets());
}

DesignInstance synthesize_benchmark(std::uint64_t seed, int n, InterfaceKind kind, double ws,
                                    const BenchmarkOptions& opt) {
  if (n < 2) throw DomainError("synthesize_benchmark: need at least 2 chiplets");
  if (!(ws >= 0.3 && ws <= 0.7))
    throw DomainError("synthesize_benchmark: whitespace target must lie in [0.3, 0.7]");
  const D2DInterfaceSpec iface = D2DInterfaceSpec::of(kind);
  Rng rng(seed);

  std::vector<ChipletSpec> chiplets(n);
  double area = 0.0;
  for (int i = 0; i < n; ++i) {
    auto& c = chiplets[i];
    c.id = i;
    c.width = round_to(rng.uniform(opt.min_dim, opt.max_dim), 0.1);
    c.height = round_to(rng.uniform(opt.min_dim, opt.max_dim), 0.1);
    c.thickness = round_to(rng.uniform(opt.min_thickness, opt.max_thickness), 0.01);
    c.power_density = std::round(rng.uniform(opt.min_power, opt.max_power));
    area += c.area();
  }
  const double side = round_to(std::sqrt(area / (1.0 - ws)), 0.1);

  // Connectivity: random spanning tree plus a few chords.
  std::set<std::pair<int, int>> edges;
  for (int k = 1; k < n; ++k) {
    const int parent = rng.uniform_int(0, k - 1);
    edges.insert({parent, k});
  }
  const int extra = n / 2;
  for (int t = 0; t < 4 * extra && static_cast<int>(edges.size()) < n - 1 + extra; ++t) {
    int a = rng.uniform_int(0, n - 1), b = rng.uniform_int(0, n - 1);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    edges.insert({a, b});
  }

  // Each chiplet gets a random sector; its interfaces sit on the edge facing the partner.
  std::vector<Vec2> sector(n);
  for (auto& s : sector) s = {rng.uniform(), rng.uniform()};

  const double px = iface.pitch_x_um * 1e-3, py = iface.pitch_y_um * 1e-3;
  const int cols = iface.cols;
  const int rows = (iface.lanes + cols - 1) / cols;
  const double extent = (cols - 1) * px;
  const double depth = (rows - 1) * py;
  const double inset = 0.1;

  std::vector<std::vector<Module>> modules(n);
  for (const auto& [a, b] : edges) {
    for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
      Module m;
      m.partner = j;
      m.edge = facing_edge(sector[i], sector[j]);
      const Vec2 d{sector[j].x - sector[i].x, sector[j].y - sector[i].y};
      m.along_key = (m.edge == kRight || m.edge == kLeft) ? d.y : d.x;
      modules[i].push_back(m);
    }
  }

  for (int i = 0; i < n; ++i) {
    auto& c = chiplets[i];
    auto& mods = modules[i];
    std::stable_sort(mods.begin(), mods.end(), [](const Module& x, const Module& y) {
      return x.partner < y.partner;
    });
    int next_pin = 0;
    for (int e = 0; e < 4; ++e) {
      std::vector<Module*> on_edge;
      for (auto& m : mods)
        if (m.edge == e) on_edge.push_back(&m);
      std::stable_sort(on_edge.begin(), on_edge.end(), [](const Module* x, const Module* y) {
        return x->along_key < y->along_key;
      });
      const int cnt = static_cast<int>(on_edge.size());
      const bool vertical = (e == kRight || e == kLeft);
      const double len = vertical ? c.height : c.width;
      const double half_perp = vertical ? c.width / 2 : c.height / 2;
      const double spacing = len / (cnt + 1);
      const bool stacked = spacing < extent + 0.1;
      for (int k = 0; k < cnt; ++k) {
        Module& m = *on_edge[k];
        double t = -len / 2 + spacing * (k + 1);
        t = std::clamp(t, -len / 2 + extent / 2, len / 2 - extent / 2);
        const double base = inset + (stacked ? k * (depth + py + 0.05) : 0.0);
        for (int lane = 0; lane < iface.lanes; ++lane) {
          const double along = t + (lane % cols - (cols - 1) / 2.0) * px;
          double perp = half_perp - std::min(base + (lane / cols) * py, half_perp);
          double x, y;
          switch (e) {
            case kRight: x = perp; y = along; break;
            case kLeft: x = -perp; y = along; break;
            case kTop: x = along; y = perp; break;
            default: x = along; y = -perp; break;
          }
          x = std::clamp(x, -c.width / 2, c.width / 2);
          y = std::clamp(y, -c.height / 2, c.height / 2);
          const int clump = static_cast<int>(&m - mods.data());
          c.bumps.push_back({next_pin, x, y, clump});
          m.pins.push_back(next_pin++);
        }
      }
    }
  }

  std::vector<Net> nets;
  for (const auto& [a, b] : edges) {
    const Module* ma = nullptr;
    const Module* mb = nullptr;
    for (const auto& m : modules[a])
      if (m.partner == b) ma = &m;
    for (const auto& m : modules[b])
      if (m.partner == a) mb = &m;
    for (int lane = 0; lane < iface.lanes; ++lane) {
      const int id = static_cast<int>(nets.size());
      nets.push_back({id, {a, ma->pins[lane]}, {b, mb->pins[lane]}});
    }
  }

  InterposerSpec ip{side, side, opt.grid, opt.min_spacing};
  DesignInstance design(ip, std::move(chiplets), std::move(nets));
  if (!shelf_pack(design, opt.min_spacing))
    throw DomainError("synthesize_benchmark: chiplets cannot fit at the requested whitespace");
  return design;
}

}  // namespace atmplace
