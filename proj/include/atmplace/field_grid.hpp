#pragma once

#include <string>
#include <vector>

namespace atmplace {

// Uniform cell-centered scalar field over the interposer. Row-major, row 0 at y = 0.
class FieldGrid {
 public:
  FieldGrid() = default;
  FieldGrid(int nx, int ny, double width, double height, double fill = 0.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double width() const { return nx_ * dx_; }
  double height() const { return ny_ * dy_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double x_center(int ix) const { return (ix + 0.5) * dx_; }
  double y_center(int iy) const { return (iy + 0.5) * dy_; }

  double& at(int ix, int iy) { return values_[static_cast<std::size_t>(iy) * nx_ + ix]; }
  double at(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * nx_ + ix]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double max() const;
  double min() const;
  bool same_shape(const FieldGrid& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

 private:
  int nx_ = 0;
  int ny_ = 0;
  double dx_ = 0.0;
  double dy_ = 0.0;
  std::vector<double> values_;
};

// Peak-to-valley, µm in = µm out.
double warpage_metric(const FieldGrid& field);

double field_mae(const FieldGrid& a, const FieldGrid& b);
double field_pearson(const FieldGrid& a, const FieldGrid& b);
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Subtracts the least-squares plane p0 + p1 x + p2 y.
FieldGrid detrend_plane(const FieldGrid& field);

// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

std::string field_to_csv(const FieldGrid& field);
FieldGrid field_from_csv(const std::string& text, double width, double height);
std::string field_to_svg(const FieldGrid& field, const std::string& title);

}  // namespace atmplace
