#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "atmplace/errors.hpp"

namespace atmplace {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct InterposerSpec {
  double width = 0.0;   // mm
  double height = 0.0;  // mm
  int grid = 64;        // cells per side
  double min_spacing = 0.1;  // mm
  bool operator==(const InterposerSpec&) const = default;
};

struct BumpPin {
  int pin_id = 0;
  double x = 0.0;  // offset from chiplet center, mm
  double y = 0.0;
  int clump_id = 0;
  bool operator==(const BumpPin&) const = default;
};

struct ChipletSpec {
  int id = 0;
  double width = 0.0;
  double height = 0.0;
  double thickness = 0.0;
  double power_density = 0.0;  // W/m^2
  std::vector<BumpPin> bumps;
  double area() const { return width * height; }
  bool operator==(const ChipletSpec&) const = default;
};

struct PinRef {
  int chiplet = 0;
  int pin = 0;
  bool operator==(const PinRef&) const = default;
};

struct Net {
  int id = 0;
  PinRef a;
  PinRef b;
  bool operator==(const Net&) const = default;
};

enum class InterfaceKind { Standard_x16, Advanced_x32 };

struct D2DInterfaceSpec {
  InterfaceKind kind;
  int cols;
  int lanes;
  double bump_pitch_um;
  double pitch_x_um;
  double pitch_y_um;

  static D2DInterfaceSpec of(InterfaceKind kind);
};

std::string interface_name(InterfaceKind kind);
InterfaceKind parse_interface(const std::string& s);

// Immutable problem description. Chiplet ids must equal their index.
class DesignInstance {
 public:
  DesignInstance() = default;
  DesignInstance(InterposerSpec interposer, std::vector<ChipletSpec> chiplets,
                 std::vector<Net> nets);

  const InterposerSpec& interposer() const { return interposer_; }
  const std::vector<ChipletSpec>& chiplets() const { return chiplets_; }
  const std::vector<Net>& nets() const { return nets_; }
  int size() const { return static_cast<int>(chiplets_.size()); }
  const ChipletSpec& chiplet(int i) const { return chiplets_.at(i); }

  // Offset of pin `pin_id` on chiplet i.
  const BumpPin& pin(int chiplet, int pin_id) const;
  const BumpPin& pin(const PinRef& ref) const { return pin(ref.chiplet, ref.pin); }

  // Centroid of the pins on chiplet i whose nets reach chiplet j.
  const std::map<std::pair<int, int>, Vec2>& clump_offsets() const { return clump_offsets_; }
  Vec2 clump_offset(int i, int j) const;
  int net_count(int i, int j) const;
  // Unordered connected pairs (i < j).
  const std::vector<std::pair<int, int>>& connected_pairs() const { return pairs_; }
  double total_area() const;

  bool operator==(const DesignInstance& o) const {
    return interposer_ == o.interposer_ && chiplets_ == o.chiplets_ && nets_ == o.nets_;
  }

 private:
  InterposerSpec interposer_;
  std::vector<ChipletSpec> chiplets_;
  std::vector<Net> nets_;
  std::vector<std::map<int, int>> pin_index_;
  std::map<std::pair<int, int>, Vec2> clump_offsets_;
  std::map<std::pair<int, int>, int> net_counts_;
  std::vector<std::pair<int, int>> pairs_;
};

struct ChipletPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // degrees
  bool operator==(const ChipletPose&) const = default;
};

using Placement = std::vector<ChipletPose>;

inline constexpr std::array<double, 4> kOrientations = {0.0, 90.0, 180.0, 270.0};

// Index into kOrientations; throws InvalidOrientation when θ is not snapped.
int orientation_index(double theta);
bool is_snapped(double theta);

Vec2 rotated_dims(const ChipletSpec& chiplet, double theta);
Vec2 rotate_offset(double x, double y, int orient);
Vec2 bump_abs_position(const ChipletPose& pose, const BumpPin& pin);

double exact_wirelength(const DesignInstance& design, const Placement& placement);

struct LegalityReport {
  bool containment_ok = true;
  double min_pairwise_gap = 0.0;  // +inf for fewer than two chiplets
  std::vector<std::pair<int, int>> overlap_pairs;
  std::vector<int> containment_violations;
  bool legal() const { return containment_ok && overlap_pairs.empty(); }
};

LegalityReport check_legal(const DesignInstance& design, const Placement& placement,
                           double tol = 1e-9);

// Separation of two axis-aligned rectangles: the larger of the x and y edge gaps.
double rect_separation(const ChipletPose& a, Vec2 dims_a, const ChipletPose& b, Vec2 dims_b);

}  // namespace atmplace
