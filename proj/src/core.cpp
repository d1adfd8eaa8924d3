#include "atmplace/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace atmplace {

D2DInterfaceSpec D2DInterfaceSpec::of(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::Standard_x16:
      return {kind, 12, 16, 100.0, 180.0, 90.0};
    case InterfaceKind::Advanced_x32:
      return {kind, 16, 32, 25.0, 27.0, 42.0};
  }
  throw DomainError("unknown interface kind");
}

std::string interface_name(InterfaceKind kind) {
  return kind == InterfaceKind::Standard_x16 ? "x16" : "x32";
}

InterfaceKind parse_interface(const std::string& s) {
  if (s == "x16" || s == "standard" || s == "Standard_x16") return InterfaceKind::Standard_x16;
  if (s == "x32" || s == "advanced" || s == "Advanced_x32") return InterfaceKind::Advanced_x32;
  throw DomainError("unknown interface '" + s + "' (expected x16 or x32)");
}

DesignInstance::DesignInstance(InterposerSpec interposer, std::vector<ChipletSpec> chiplets,
                               std::vector<Net> nets)
    : interposer_(interposer), chiplets_(std::move(chiplets)), nets_(std::move(nets)) {
  if (!(interposer_.width > 0) || !(interposer_.height > 0))
    throw ValidationError("interposer: width and height must be positive");
  if (interposer_.grid < 8) throw ValidationError("interposer: grid must be >= 8");
  if (!(interposer_.min_spacing >= 0)) throw ValidationError("interposer: min_spacing must be >= 0");

  const int n = size();
  pin_index_.resize(n);
  for (int i = 0; i < n; ++i) {
    const ChipletSpec& c = chiplets_[i];
    const std::string ctx = "chiplets[" + std::to_string(i) + "]";
    if (c.id != i) throw ValidationError(ctx + ": id must equal its index");
    if (!(c.width > 0) || !(c.height > 0) || !(c.thickness > 0))
      throw ValidationError(ctx + ": w, h, t must be positive");
    if (!(c.power_density >= 0)) throw ValidationError(ctx + ": power density must be >= 0");
    for (std::size_t k = 0; k < c.bumps.size(); ++k) {
      const BumpPin& b = c.bumps[k];
      if (std::abs(b.x) > c.width / 2 + 1e-12 || std::abs(b.y) > c.height / 2 + 1e-12)
        throw ValidationError(ctx + ".bumps[" + std::to_string(k) + "]: offset outside chiplet");
      if (!pin_index_[i].emplace(b.pin_id, static_cast<int>(k)).second)
        throw ValidationError(ctx + ": duplicate pin id " + std::to_string(b.pin_id));
    }
  }

  std::map<std::pair<int, int>, Vec2> sums;
  std::map<std::pair<int, int>, int> counts;
  for (std::size_t k = 0; k < nets_.size(); ++k) {
    const Net& e = nets_[k];
    const std::string ctx = "nets[" + std::to_string(k) + "]";
    for (const PinRef* r : {&e.a, &e.b}) {
      if (r->chiplet < 0 || r->chiplet >= n)
        throw ValidationError(ctx + ": unknown chiplet " + std::to_string(r->chiplet));
      if (!pin_index_[r->chiplet].count(r->pin))
        throw ValidationError(ctx + ": unknown pin " + std::to_string(r->pin));
    }
    if (e.a.chiplet == e.b.chiplet) throw ValidationError(ctx + ": endpoints on the same chiplet");
    const BumpPin& pa = pin(e.a);
    const BumpPin& pb = pin(e.b);
    auto& sa = sums[{e.a.chiplet, e.b.chiplet}];
    sa.x += pa.x;
    sa.y += pa.y;
    auto& sb = sums[{e.b.chiplet, e.a.chiplet}];
    sb.x += pb.x;
    sb.y += pb.y;
    ++counts[{e.a.chiplet, e.b.chiplet}];
    ++counts[{e.b.chiplet, e.a.chiplet}];
  }
  for (const auto& [key, s] : sums) {
    const int cnt = counts[key];
    clump_offsets_[key] = {s.x / cnt, s.y / cnt};
    if (key.first < key.second) pairs_.push_back(key);
  }
  net_counts_ = std::move(counts);
}

const BumpPin& DesignInstance::pin(int chiplet, int pin_id) const {
  const auto& idx = pin_index_.at(chiplet);
  auto it = idx.find(pin_id);
  if (it == idx.end()) throw ValidationError("unknown pin " + std::to_string(pin_id));
  return chiplets_[chiplet].bumps[it->second];
}

Vec2 DesignInstance::clump_offset(int i, int j) const {
  auto it = clump_offsets_.find({i, j});
  return it == clump_offsets_.end() ? Vec2{} : it->second;
}

int DesignInstance::net_count(int i, int j) const {
  auto it = net_counts_.find({i, j});
  return it == net_counts_.end() ? 0 : it->second;
}

double DesignInstance::total_area() const {
  double s = 0.0;
  for (const auto& c : chiplets_) s += c.area();
  return s;
}

int orientation_index(double theta) {
  double t = std::fmod(theta, 360.0);
  if (t < 0) t += 360.0;
  for (int k = 0; k < 4; ++k) {
    if (std::abs(t - kOrientations[k]) <= 1e-9) return k;
  }
  if (std::abs(t - 360.0) <= 1e-9) return 0;
  throw InvalidOrientation("orientation " + std::to_string(theta) + " is not a multiple of 90");
}

bool is_snapped(double theta) {
  try {
    orientation_index(theta);
    return true;
  } catch (const InvalidOrientation&) {
    return false;
  }
}

Vec2 rotated_dims(const ChipletSpec& chiplet, double theta) {
  const int k = orientation_index(theta);
  if (k % 2 == 0) return {chiplet.width, chiplet.height};
  return {chiplet.height, chiplet.width};
}

Vec2 rotate_offset(double x, double y, int orient) {
  switch (orient & 3) {
    case 0: return {x, y};
    case 1: return {-y, x};
    case 2: return {-x, -y};
    default: return {y, -x};
  }
}

Vec2 bump_abs_position(const ChipletPose& pose, const BumpPin& pin) {
  const Vec2 r = rotate_offset(pin.x, pin.y, orientation_index(pose.theta));
  return {pose.x + r.x, pose.y + r.y};
}

double exact_wirelength(const DesignInstance& design, const Placement& placement) {
  if (placement.size() != design.chiplets().size())
    throw ValidationError("placement size does not match design");
  double total = 0.0;
  for (const Net& e : design.nets()) {
    const Vec2 a = bump_abs_position(placement[e.a.chiplet], design.pin(e.a));
    const Vec2 b = bump_abs_position(placement[e.b.chiplet], design.pin(e.b));
    total += std::abs(a.x - b.x) + std::abs(a.y - b.y);
  }
  return total;
}

double rect_separation(const ChipletPose& a, Vec2 da, const ChipletPose& b, Vec2 db) {
  const double gx = std::abs(a.x - b.x) - 0.5 * (da.x + db.x);
  const double gy = std::abs(a.y - b.y) - 0.5 * (da.y + db.y);
  return std::max(gx, gy);
}

LegalityReport check_legal(const DesignInstance& design, const Placement& placement, double tol) {
  if (placement.size() != design.chiplets().size())
    throw ValidationError("placement size does not match design");
  LegalityReport rep;
  const auto& ip = design.interposer();
  const int n = design.size();
  std::vector<Vec2> dims(n);
  for (int i = 0; i < n; ++i) {
    dims[i] = rotated_dims(design.chiplet(i), placement[i].theta);
    const auto& p = placement[i];
    const bool inside = p.x - dims[i].x / 2 >= -tol && p.x + dims[i].x / 2 <= ip.width + tol &&
                        p.y - dims[i].y / 2 >= -tol && p.y + dims[i].y / 2 <= ip.height + tol;
    if (!inside) {
      rep.containment_ok = false;
      rep.containment_violations.push_back(i);
    }
  }
  rep.min_pairwise_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double sep = rect_separation(placement[i], dims[i], placement[j], dims[j]);
      rep.min_pairwise_gap = std::min(rep.min_pairwise_gap, sep);
      if (sep < ip.min_spacing - tol) rep.overlap_pairs.emplace_back(i, j);
    }
  }
  return rep;
}

}  // namespace atmplace
